//! Writes a synthetic signal to WAV, codes it and writes the decoded WAV.
//! Usage: `wav_io [input.wav] [output_dir]`.

use std::path::PathBuf;

use nladpcm::codec::{decode, encode, CodecConfig};
use nladpcm::dsp::segsnr;
use nladpcm::harness::{read_wav, synthesize, write_wav, SyntheticKind};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let input = args.next().map(PathBuf::from);
    let dir = args.next().map(PathBuf::from).unwrap_or_else(std::env::temp_dir);
    let x = match input {
        Some(p) => read_wav(&p)?,
        None => {
            let p = dir.join("nlad_input.wav");
            write_wav(&p, &synthesize(SyntheticKind::SpeechLike, 8000, 1))?;
            read_wav(&p)?
        }
    };
    let out = encode(&x, &CodecConfig::lpc(10, 4)?)?;
    let y = decode(&out.bitstream)?;
    let path = dir.join("nlad_decoded.wav");
    write_wav(&path, &y)?;
    let back = read_wav(&path)?;
    let rep = segsnr(&x.samples, &back.samples, 200)?;
    println!("{} samples -> {} bytes -> {}", x.len(), out.bitstream.to_bytes().len(), path.display());
    println!("SEGSNR after 16-bit output: {:.2} dB (float {:.2} dB)", rep.segsnr_db, out.report.segsnr_db);
    Ok(())
}

//! Encode, serialize, parse and decode; checks the decoder matches the
//! encoder's reconstruction bit for bit.

use nladpcm::codec::{decode_bytes, encode, CodecConfig};
use nladpcm::harness::desk_corpus;
use nladpcm::training::TrainConfig;

fn main() -> nladpcm::Result<()> {
    let x = desk_corpus(1, 2400, 4).remove(0).signal;
    for bits in 2..=5u8 {
        for cfg in [CodecConfig::lpc(10, bits)?, CodecConfig::mlp(TrainConfig::default(), bits)?] {
            let out = encode(&x, &cfg)?;
            let bytes = out.bitstream.to_bytes();
            let y = decode_bytes(&bytes).expect("own bitstream decodes");
            let exact = y.samples.iter().zip(&out.reconstruction.samples).all(|(a, b)| a.to_bits() == b.to_bits());
            println!(
                "{:<5} {bits} bits: {} bytes, SEGSNR {:.2} dB (std {:.2}), lockstep {exact}",
                out.frames[1].predictor,
                bytes.len(),
                out.report.segsnr_db,
                out.report.std_db
            );
        }
    }
    Ok(())
}

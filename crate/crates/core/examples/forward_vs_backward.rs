//! Backward adaptation against the forward-unquantized diagnostic mode.

use nladpcm::codec::{encode, forward_unquantized_mode, Adaptation, CodecConfig};
use nladpcm::harness::desk_corpus;

fn main() -> nladpcm::Result<()> {
    for entry in desk_corpus(5, 4000, 1) {
        let mut line = format!("{:<18}", entry.name);
        for bits in 2..=5u8 {
            let cfg = CodecConfig::lpc(10, bits)?;
            let b = encode(&entry.signal, &cfg)?.report.segsnr_db;
            let fwd = cfg.with_adaptation(Adaptation::ForwardUnquantized);
            let f = forward_unquantized_mode(&entry.signal, &fwd)?.report.segsnr_db;
            line += &format!("  Nq={bits} bwd {b:5.2} fwd {f:5.2}");
        }
        println!("{line}");
    }
    Ok(())
}

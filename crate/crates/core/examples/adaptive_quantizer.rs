//! The Jayant quantizer tracking a signal whose level jumps by 30 dB.

use nladpcm::quantizer::QuantizerState;

fn main() -> nladpcm::Result<()> {
    for bits in 2..=5u8 {
        let mut q = QuantizerState::init(bits, 0.02)?;
        let mut err = 0.0;
        let mut sig = 0.0;
        for n in 0..4000 {
            let amp = if (n / 1000) % 2 == 0 { 0.01 } else { 0.3 };
            let x = amp * (n as f64 * 0.37).sin();
            let code = q.quantize(x)?;
            let y = q.dequantize(code)?;
            q = q.adapt(code);
            err += (x - y).powi(2);
            sig += x * x;
        }
        println!("{bits} bits: SNR {:.2} dB, final step {:.4}", 10.0 * (sig / err).log10(), q.step);
    }
    Ok(())
}

//! Frame-by-frame LPC analysis of a synthetic speech-like signal.

use nladpcm::dsp::{autocorrelation, frame_signal, levinson_durbin, lpc_predict};
use nladpcm::harness::{synthesize, SyntheticKind};

fn main() -> nladpcm::Result<()> {
    let x = synthesize(SyntheticKind::SpeechLike, 1600, 7);
    let framing = frame_signal(&x.samples, 200)?;
    for (k, view) in framing.frames.iter().enumerate() {
        let frame = view.samples;
        let acf = autocorrelation(frame, 10)?;
        let c = levinson_durbin(&acf, 10)?;
        let mut err = 0.0f64;
        for n in 10..frame.len() {
            let hist = &frame[n - 10..n];
            err += (frame[n] - lpc_predict(&c, hist)?).powi(2);
        }
        let gain = 10.0 * (acf[0] / err.max(1e-300)).log10();
        println!(
            "frame {k}: order {} residual energy {:.3e} prediction gain {gain:.1} dB a1={:+.3}",
            c.order(),
            c.residual_energy,
            c.a.first().copied().unwrap_or(0.0)
        );
    }
    Ok(())
}

mod common;

use common::*;
use nladpcm::quantizer::{Code, QuantizerParams, QuantizerState, MAX_BITS, MIN_BITS};
use proptest::prelude::*;
use rand::Rng;

#[test]
fn step_stays_in_bounds_over_a_million_codes() {
    let mut r = rng(99);
    for bits in MIN_BITS..=MAX_BITS {
        let mut q = QuantizerState::init(bits, 0.02).unwrap();
        let max = q.max_level();
        let (lo, hi) = (q.params.step_min, q.params.step_max);
        let mut seen_hi = false;
        for i in 0..1_000_000u32 {
            // drift between long runs of small and large codes so both
            // bounds are exercised
            let bias = ((i / 5000) % 2) as usize;
            let level = if bias == 0 { r.random_range(0..=max.min(1)) } else { r.random_range(max / 2..=max) };
            let code = Code::from_level(level, r.random());
            q = q.adapt(code);
            assert!(q.step >= lo && q.step <= hi, "step {} out of bounds", q.step);
            seen_hi |= q.step == hi;
        }
        assert!(seen_hi, "{bits} bits never reached step_max");
    }
}

#[test]
fn decoder_replays_encoder_step_trajectory() {
    let mut r = rng(3);
    for bits in MIN_BITS..=MAX_BITS {
        let mut enc = QuantizerState::init(bits, 0.02).unwrap();
        let mut codes = Vec::new();
        let mut trajectory = Vec::new();
        for _ in 0..20_000 {
            let residual = gaussian(&mut r) * 0.05 * (1.0 + r.random::<f64>() * 4.0);
            let c = enc.quantize(residual).unwrap();
            assert!(c.fits(bits));
            codes.push(c);
            enc = enc.adapt(c);
            trajectory.push(enc.step.to_bits());
        }
        let mut dec = QuantizerState::init(bits, 0.02).unwrap();
        for (c, s) in codes.iter().zip(&trajectory) {
            dec = dec.adapt(*c);
            assert_eq!(dec.step.to_bits(), *s);
        }
    }
}

#[test]
fn grid_error_bound_is_half_step() {
    for bits in MIN_BITS..=MAX_BITS {
        let q = QuantizerState::init(bits, 0.1).unwrap();
        let top = q.step * (1u32 << (bits - 1)) as f64;
        for i in 1..10_000 {
            let r = top * i as f64 / 10_000.0;
            for s in [r, -r] {
                let y = q.dequantize(q.quantize(s).unwrap()).unwrap();
                assert!((y - s).abs() <= q.step / 2.0 + 1e-15);
            }
        }
    }
}

#[test]
fn table_shapes_and_bad_initial_step() {
    for bits in MIN_BITS..=MAX_BITS {
        let p = QuantizerParams::new(bits).unwrap();
        assert_eq!(p.multipliers.len(), 1 << (bits - 1));
    }
    assert!(QuantizerState::init(3, 1e-7).is_err());
    assert!(QuantizerState::init(6, 0.02).is_err());
}

proptest! {
    #[test]
    fn reconstruction_magnitude_is_monotone(
        bits in MIN_BITS..=MAX_BITS,
        step in 1e-4f64..0.4,
        a in 0.0f64..2.0,
        b in 0.0f64..2.0,
    ) {
        let q = QuantizerState::init(bits, step).unwrap();
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        for sign in [1.0, -1.0] {
            let ylo = q.dequantize(q.quantize(sign * lo).unwrap()).unwrap().abs();
            let yhi = q.dequantize(q.quantize(sign * hi).unwrap()).unwrap().abs();
            prop_assert!(ylo <= yhi);
        }
    }

    #[test]
    fn codes_always_fit(bits in MIN_BITS..=MAX_BITS, step in 1e-5f64..0.5, r in -1e6f64..1e6) {
        let q = QuantizerState::init(bits, step).unwrap();
        let c = q.quantize(r).unwrap();
        prop_assert!(c.fits(bits));
        prop_assert_eq!(Code::from_bits(c.to_bits(bits), bits), c);
        prop_assert_eq!(c.is_negative(), r < 0.0);
    }
}

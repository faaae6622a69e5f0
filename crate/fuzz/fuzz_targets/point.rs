#![no_main]

use libfuzzer_sys::fuzz_target;
use maser_tur::pipeline::evaluate_point;
use maser_tur::EngineParams;

// Six little-endian f64s: γ_u, γ_l, n_u, n_l, ε, Δ. Errors are fine, panics
// and non-finite successes are not.
fuzz_target!(|data: &[u8]| {
    if data.len() < 48 {
        return;
    }
    let v: Vec<f64> = data[..48]
        .chunks_exact(8)
        .map(|b| f64::from_le_bytes(b.try_into().unwrap()))
        .collect();
    let Ok(params) = EngineParams::new(v[0], v[1], v[2], v[3], v[4], v[5]) else {
        return;
    };
    if let Ok(r) = evaluate_point(&params, data.len() > 48) {
        assert!(r.tur.q.is_finite() && r.cumulants.variance.is_finite());
        if let Some(b) = r.bound {
            assert!(b.bound.is_finite());
        }
    }
});

//! Closed-form shapes used as initial data.

/// k-th root (k ≥ 1) of cos β·cosh β + 1 = 0, the clamped-free frequency
/// equation. Bisection on [(k − 1)π, kπ] in the scaled form
/// cos β + 1/cosh β, which is free of overflow.
pub fn clamped_free_root(k: usize) -> f64 {
    assert!(k >= 1, "mode index starts at 1");
    let g = |b: f64| b.cos() + 1.0 / b.cosh();
    let (mut lo, mut hi) = ((k - 1) as f64 * std::f64::consts::PI + 1e-9, k as f64 * std::f64::consts::PI);
    let glo = g(lo);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if (g(mid) > 0.0) == (glo > 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Clamped-free mode k, scaled to unit tip deflection: (φ(x), φ′(x)).
pub fn cantilever_mode(k: usize, x: f64) -> (f64, f64) {
    let b = clamped_free_root(k);
    let sigma = (b.cosh() + b.cos()) / (b.sinh() + b.sin());
    let raw = |x: f64| {
        let bx = b * x;
        (
            bx.cosh() - bx.cos() - sigma * (bx.sinh() - bx.sin()),
            b * (bx.sinh() + bx.sin() - sigma * (bx.cosh() - bx.cos())),
        )
    };
    let tip = raw(1.0).0;
    let (v, d) = raw(x);
    (v / tip, d / tip)
}

/// a·x²·(x − 1)² and its derivative.
pub fn bump(a: f64, x: f64) -> (f64, f64) {
    let u = x * (x - 1.0);
    (a * u * u, a * 2.0 * u * (2.0 * x - 1.0))
}

//! Analytic quartic solver used by the direct eigensolver.
//!
//! Classical Ferrari factorization into two quadratics via a resolvent
//! cubic, followed by Newton polish on the original polynomial. Returns the
//! real parts of all four roots plus the largest imaginary magnitude so the
//! caller can decide whether the spectrum is effectively real.

/// Real roots of t^3 + c2 t^2 + c1 t + c0 (1 or 3 entries).
fn cubic_real_roots(c2: f64, c1: f64, c0: f64) -> Vec<f64> {
    // Depress: t = s - c2/3.
    let shift = c2 / 3.0;
    let p = c1 - c2 * c2 / 3.0;
    let q = c0 - c1 * c2 / 3.0 + 2.0 * c2 * c2 * c2 / 27.0;
    let half_q = 0.5 * q;
    let third_p = p / 3.0;
    let disc = half_q * half_q + third_p * third_p * third_p;
    let mut roots = Vec::with_capacity(3);
    if disc > 0.0 {
        // One real root; Cardano with cancellation-safe pairing.
        let sq = disc.sqrt();
        let u = (-half_q + sq).cbrt();
        let v = if u != 0.0 { -third_p / u } else { (-half_q - sq).cbrt() };
        roots.push(u + v - shift);
    } else if p == 0.0 {
        // Triple root (q must be ~0 here too).
        roots.push((-q).cbrt() - shift);
    } else {
        // Three real roots; trigonometric form.
        let m = 2.0 * (-third_p).sqrt();
        let arg = (3.0 * q / (p * m)).clamp(-1.0, 1.0);
        let theta = arg.acos() / 3.0;
        for k in 0..3 {
            let ang = theta - 2.0 * std::f64::consts::PI * k as f64 / 3.0;
            roots.push(m * ang.cos() - shift);
        }
    }
    roots
}

/// Stable real-quadratic solve of y^2 + b y + c = 0.
/// Returns (root1, root2, imag): imag = 0 for real roots, otherwise the
/// roots share real part root1 = root2 with imaginary parts +-imag.
fn quadratic(b: f64, c: f64) -> (f64, f64, f64) {
    let disc = b * b - 4.0 * c;
    if disc >= 0.0 {
        let sq = disc.sqrt();
        let q = -0.5 * (b + b.signum() * sq);
        let r1 = q;
        let r2 = if q != 0.0 { c / q } else { -b - q };
        (r1, r2, 0.0)
    } else {
        let re = -0.5 * b;
        (re, re, 0.5 * (-disc).sqrt())
    }
}

fn horner4(x: f64, a3: f64, a2: f64, a1: f64, a0: f64) -> f64 {
    (((x + a3) * x + a2) * x + a1) * x + a0
}

fn horner4_deriv(x: f64, a3: f64, a2: f64) -> f64 {
    // d/dx of x^4 + a3 x^3 + a2 x^2 + a1 x + a0, a1 folded in by caller.
    ((4.0 * x + 3.0 * a3) * x + 2.0 * a2) * x
}

fn polish(mut x: f64, a3: f64, a2: f64, a1: f64, a0: f64) -> f64 {
    for _ in 0..30 {
        let f = horner4(x, a3, a2, a1, a0);
        let fp = horner4_deriv(x, a3, a2) + a1;
        if fp == 0.0 {
            break;
        }
        let step = f / fp;
        x -= step;
        if step.abs() <= 1e-15 * x.abs().max(1e-300) {
            break;
        }
    }
    x
}

/// Roots of x^4 + a3 x^3 + a2 x^2 + a1 x + a0.
///
/// Returns real parts sorted ascending and the largest |imaginary part|
/// encountered (0 when the spectrum is real).
pub fn quartic_roots(a3: f64, a2: f64, a1: f64, a0: f64) -> ([f64; 4], f64) {
    // Depress: x = y - a3/4.
    let s = a3 / 4.0;
    let s2 = s * s;
    let p = a2 - 6.0 * s2;
    let q = a1 - 2.0 * a2 * s + 8.0 * s * s2;
    let r = a0 - a1 * s + a2 * s2 - 3.0 * s2 * s2;

    // Scale for "q is negligible" and degenerate-alpha decisions.
    let scale = p.abs().max(r.abs().sqrt()).max(q.abs().powf(2.0 / 3.0)).max(1e-300);

    let ys: [(f64, f64); 4]; // (real, imag)
    if q.abs() <= 1e-14 * scale * scale.sqrt() {
        // Biquadratic: z^2 + p z + r = 0 with z = y^2.
        let (z1, z2, zim) = quadratic(p, r);
        if zim > 0.0 {
            // Complex z: roots come in a conjugate quadruple. The real
            // spectrum is lost; report magnitudes via sqrt of |z|.
            let modulus = (z1 * z1 + zim * zim).sqrt();
            let re = ((modulus + z1) / 2.0).sqrt();
            let im = ((modulus - z1) / 2.0).sqrt();
            ys = [(re, im), (re, -im), (-re, im), (-re, -im)];
        } else {
            let part = |z: f64| -> (f64, f64) {
                if z >= 0.0 {
                    (z.sqrt(), 0.0)
                } else {
                    (0.0, (-z).sqrt())
                }
            };
            let (r1, i1) = part(z1);
            let (r2, i2) = part(z2);
            ys = [(r1, i1), (-r1, i1), (r2, i2), (-r2, i2)];
        }
    } else {
        // Resolvent in w = alpha^2: w^3 + 2p w^2 + (p^2 - 4r) w - q^2 = 0.
        // A nonnegative real root always exists (value at 0 is -q^2 <= 0).
        let candidates = cubic_real_roots(2.0 * p, p * p - 4.0 * r, -(q * q));
        let w = candidates.into_iter().fold(0.0_f64, f64::max).max(0.0);
        let alpha = w.sqrt();
        if alpha == 0.0 {
            // Should have taken the biquadratic branch; fall back to it.
            let (z1, z2, _) = quadratic(p, r);
            let part = |z: f64| if z >= 0.0 { (z.sqrt(), 0.0) } else { (0.0, (-z).sqrt()) };
            let (r1, i1) = part(z1);
            let (r2, i2) = part(z2);
            ys = [(r1, i1), (-r1, i1), (r2, i2), (-r2, i2)];
        } else {
            let d = q / alpha;
            let beta = 0.5 * (p + w - d);
            let gamma = 0.5 * (p + w + d);
            let (y1, y2, im1) = quadratic(alpha, beta);
            let (y3, y4, im2) = quadratic(-alpha, gamma);
            ys = [(y1, im1), (y2, -im1), (y3, im2), (y4, -im2)];
        }
    }

    let mut max_imag: f64 = 0.0;
    let mut roots = [0.0_f64; 4];
    for (i, (re, im)) in ys.iter().enumerate() {
        max_imag = max_imag.max(im.abs());
        roots[i] = re - s; // undo the depression shift
    }
    if max_imag == 0.0 {
        for root in roots.iter_mut() {
            *root = polish(*root, a3, a2, a1, a0);
        }
    }
    roots.sort_by(|a, b| a.partial_cmp(b).unwrap());
    (roots, max_imag)
}

//! Lattice Green's functions of `−Δ_N + ω₀² − ω²` on the chain `0..=n`
//! (Neumann boundary), their resonance-regularized endpoint values, and the
//! Green's function of the infinite lattice `ℤ` outside the band.
//!
//! All finite-chain quantities are spectral sums over the cosine eigenbasis
//! `φ_j(x) ∝ cos(πj(2x+1)/(2(n+1)))` with eigenvalues `ω_j²`.

use std::f64::consts::PI;

use crate::chain::{classify, nearest_mode, BandLocation, ChainParams};
use crate::error::{Error, Result};
use crate::exec::Exec;

fn half_angle(j: usize, n: usize) -> f64 {
    PI * j as f64 / (2.0 * (n + 1) as f64)
}

/// Weight of mode `j` in the endpoint functions `Gˢ`: `φ_j(0)²`.
pub(crate) fn endpoint_weight(j: usize, n: usize) -> f64 {
    if j == 0 {
        1.0 / (n + 1) as f64
    } else {
        2.0 * half_angle(j, n).cos().powi(2) / (n + 1) as f64
    }
}

fn parity(j: usize) -> f64 {
    if j.is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

fn guard(omega: f64, params: &ChainParams) -> Result<()> {
    match classify(omega, params) {
        BandLocation::OnFiniteResonance { j } => Err(Error::Resonance { omega, mode: j }),
        _ => Ok(()),
    }
}

fn check_site(x: usize, params: &ChainParams) -> Result<()> {
    if x > params.n {
        Err(Error::domain(format!("site {x} outside 0..={}", params.n)))
    } else {
        Ok(())
    }
}

/// `G_{x,y}(ω, n)`, the kernel of `(−Δ_N + ω₀² − ω²)⁻¹`.
pub fn green(x: usize, y: usize, omega: f64, params: &ChainParams) -> Result<f64> {
    check_site(x, params)?;
    check_site(y, params)?;
    guard(omega, params)?;
    let n = params.n;
    let m = (n + 1) as f64;
    let mut sum = 1.0 / (m * params.mode_gap(0, omega));
    for j in 1..=n {
        let cx = (PI * j as f64 * (2 * x + 1) as f64 / (2.0 * m)).cos();
        let cy = (PI * j as f64 * (2 * y + 1) as f64 / (2.0 * m)).cos();
        sum += 2.0 / m * cx * cy / params.mode_gap(j, omega);
    }
    Ok(sum)
}

/// Site-resolved Green's functions `G⁰ₓ = G_{0,x}` and `G¹ₓ = G_{x,n}` at one frequency.
#[derive(Clone, Debug, PartialEq)]
pub struct GreensTable {
    pub omega: f64,
    pub n: usize,
    pub g0_site: Vec<f64>,
    pub g1_site: Vec<f64>,
    pub g0: f64,
    pub g1: f64,
}

/// Direct O(n²) summation.
pub fn greens_table(omega: f64, params: &ChainParams) -> Result<GreensTable> {
    greens_table_with(omega, params, Exec::default())
}

pub fn greens_table_with(omega: f64, params: &ChainParams, exec: Exec) -> Result<GreensTable> {
    guard(omega, params)?;
    let n = params.n;
    let m = (n + 1) as f64;
    let base = 1.0 / (m * params.mode_gap(0, omega));
    // per-mode factors shared by every site
    let modes: Vec<(f64, f64)> = (1..=n)
        .map(|j| {
            let c0 = half_angle(j, n).cos();
            (2.0 / m * c0 / params.mode_gap(j, omega), parity(j))
        })
        .collect();
    let rows = exec.map_range(0..n + 1, |x| {
        let (mut s0, mut s1) = (base, base);
        for (k, &(f, sign)) in modes.iter().enumerate() {
            let j = k + 1;
            let cx = (PI * j as f64 * (2 * x + 1) as f64 / (2.0 * m)).cos();
            s0 += f * cx;
            s1 += sign * f * cx;
        }
        (s0, s1)
    });
    let (g0_site, g1_site): (Vec<f64>, Vec<f64>) = rows.into_iter().unzip();
    Ok(GreensTable {
        omega,
        n,
        g0: g0_site[0],
        g1: g0_site[n],
        g0_site,
        g1_site,
    })
}

/// Endpoint functions with the nearest normal mode split off:
///
/// `G⁰ = P + rest0`, `G¹ = sign·P + rest1`, `P = w_j/(ω_j² − ω²)`.
///
/// `inv_pole = 1/P` is zero exactly on resonance, where `rest0`/`rest1` are
/// the regularized functions `Ḡˢ(ω_j, n)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EndpointSplit {
    pub mode: usize,
    pub inv_pole: f64,
    pub sign: f64,
    pub rest0: f64,
    pub rest1: f64,
}

impl EndpointSplit {
    pub fn pole(&self) -> f64 {
        1.0 / self.inv_pole
    }

    pub fn g0(&self) -> f64 {
        self.pole() + self.rest0
    }

    pub fn g1(&self) -> f64 {
        self.sign * self.pole() + self.rest1
    }

    /// `S = Ḡ⁰ − (−1)^j Ḡ¹`.
    pub fn s(&self) -> f64 {
        self.rest0 - self.sign * self.rest1
    }
}

fn endpoint_sums_except(params: &ChainParams, skip: usize, gap: impl Fn(usize) -> f64) -> (f64, f64) {
    let n = params.n;
    let (mut s0, mut s1) = (0.0, 0.0);
    for k in (0..=n).filter(|&k| k != skip) {
        let t = endpoint_weight(k, n) / gap(k);
        s0 += t;
        s1 += parity(k) * t;
    }
    (s0, s1)
}

/// Pole-split endpoint functions at an arbitrary `ω` (no resonance guard).
pub fn endpoint_split(omega: f64, params: &ChainParams) -> EndpointSplit {
    let (j, gap) = nearest_mode(omega, params);
    let (rest0, rest1) = endpoint_sums_except(params, j, |k| params.mode_gap(k, omega));
    EndpointSplit {
        mode: j,
        inv_pole: gap / endpoint_weight(j, params.n),
        sign: parity(j),
        rest0,
        rest1,
    }
}

/// `(G⁰(ω,n), G¹(ω,n))` off resonance.
pub fn endpoint_greens(omega: f64, params: &ChainParams) -> Result<(f64, f64)> {
    guard(omega, params)?;
    let s = endpoint_split(omega, params);
    Ok((s.g0(), s.g1()))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RegularizedEndpoints {
    pub mode: usize,
    pub gbar0: f64,
    pub gbar1: f64,
    pub s: f64,
}

impl RegularizedEndpoints {
    pub fn as_split(&self) -> EndpointSplit {
        EndpointSplit {
            mode: self.mode,
            inv_pole: 0.0,
            sign: parity(self.mode),
            rest0: self.gbar0,
            rest1: self.gbar1,
        }
    }
}

/// `Ḡˢ(ω_j, n)`: the endpoint sums at `ω = ω_j` with the `j`-th summand removed.
pub fn regularized_endpoints(j: usize, params: &ChainParams) -> Result<RegularizedEndpoints> {
    if j > params.n {
        return Err(Error::domain(format!("mode {j} outside 0..={}", params.n)));
    }
    let n = params.n;
    let tj = half_angle(j, n);
    // 4(sin²a − sin²b) = 4 sin(a−b) sin(a+b), exact cancellation of ω₀
    let (gbar0, gbar1) = endpoint_sums_except(params, j, |k| {
        let tk = half_angle(k, n);
        4.0 * (tk - tj).sin() * (tk + tj).sin()
    });
    Ok(RegularizedEndpoints {
        mode: j,
        gbar0,
        gbar1,
        s: gbar0 - parity(j) * gbar1,
    })
}

/// `d/dω²` of `G⁰, G¹` (`i0, i1`) and of `R₀, R₁` (`j0, j1`).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EndpointDerivatives {
    pub i0: f64,
    pub i1: f64,
    pub j0: f64,
    pub j1: f64,
}

/// Analytic term-by-term derivatives: `d/dω² (ω_j² − ω²)⁻¹ = (ω_j² − ω²)⁻²`.
pub fn endpoint_derivatives(omega: f64, params: &ChainParams) -> Result<EndpointDerivatives> {
    guard(omega, params)?;
    let n = params.n;
    let m = (n + 1) as f64;
    let mut d = EndpointDerivatives {
        i0: 0.0,
        i1: 0.0,
        j0: 0.0,
        j1: 0.0,
    };
    for k in 0..=n {
        let g = params.mode_gap(k, omega);
        let inv2 = 1.0 / (g * g);
        let w = endpoint_weight(k, n) * inv2;
        let sign = parity(k);
        d.i0 += w;
        d.i1 += sign * w;
        if k > 0 {
            let r = 2.0 / m * (PI * k as f64 / m).sin().powi(2) * inv2;
            d.j0 += r;
            d.j1 += sign * r;
        }
    }
    Ok(d)
}

/// `R_s(ω, n) = 2/(n+1) Σ_j (−1)^{js} sin²(πj/(n+1)) / (ω_j² − ω²)`.
pub fn gradient_sums(omega: f64, params: &ChainParams) -> Result<(f64, f64)> {
    guard(omega, params)?;
    let m = (params.n + 1) as f64;
    let (mut r0, mut r1) = (0.0, 0.0);
    for k in 1..=params.n {
        let t = 2.0 / m * (PI * k as f64 / m).sin().powi(2) / params.mode_gap(k, omega);
        r0 += t;
        r1 += parity(k) * t;
    }
    Ok((r0, r1))
}

/// Decaying root `λ` of `λ + 1/λ = 2 + ω₀² − ω²`, `|λ| < 1`, for `ω` strictly outside the band.
pub(crate) fn lattice_root(omega: f64, omega0: f64) -> Result<f64> {
    let (lo, hi) = crate::chain::band_edges(omega0);
    let m = omega0 * omega0 - omega * omega;
    if !(omega.abs() < lo || omega.abs() > hi) || m == 0.0 || m == -4.0 {
        return Err(Error::domain(format!(
            "omega = {omega} is not strictly outside the band of omega0 = {omega0}"
        )));
    }
    let b = 2.0 + m;
    let s = (m * (m + 4.0)).sqrt();
    Ok(2.0 / (b + b.signum() * s))
}

/// `Γₓ(ω)`, Green's function of `−Δ + ω₀² − ω²` on `ℤ`, for `ω` outside the band.
pub fn infinite_green(x: i64, omega: f64, omega0: f64) -> Result<f64> {
    let lambda = lattice_root(omega, omega0)?;
    Ok(lambda.powi(x.unsigned_abs() as i32) / (1.0 / lambda - lambda))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn chain(n: usize, omega0: f64) -> ChainParams {
        ChainParams::cold(n, omega0, 1.0, 1.0).unwrap()
    }

    /// Dense Neumann operator `−Δ_N + ω₀² − ω²`.
    fn operator(params: &ChainParams, omega: f64) -> Vec<Vec<f64>> {
        let n = params.n;
        let shift = params.omega0.powi(2) - omega * omega;
        let mut a = vec![vec![0.0; n + 1]; n + 1];
        for x in 0..=n {
            let deg = if x == 0 || x == n { 1.0 } else { 2.0 };
            a[x][x] = deg + shift;
            if x > 0 {
                a[x][x - 1] = -1.0;
            }
            if x < n {
                a[x][x + 1] = -1.0;
            }
        }
        a
    }

    #[test]
    fn two_site_examples() {
        let p = chain(1, 1.0);
        assert_abs_diff_eq!(green(0, 0, 2.0, &p).unwrap(), -2.0 / 3.0, epsilon = 1e-14);
        let t = greens_table(2.0, &p).unwrap();
        assert_abs_diff_eq!(t.g0, -2.0 / 3.0, epsilon = 1e-14);
        assert_abs_diff_eq!(t.g1, 1.0 / 3.0, epsilon = 1e-14);
    }

    #[test]
    fn symmetric_in_sites() {
        let p = chain(7, 1.0);
        for x in 0..=7 {
            for y in 0..=7 {
                assert_eq!(green(x, y, 3.0, &p).unwrap(), green(y, x, 3.0, &p).unwrap());
            }
        }
    }

    #[test]
    #[allow(clippy::needless_range_loop)]
    fn inverts_the_neumann_operator() {
        for (n, omega) in [(16, 3.0), (9, 1.37), (64, 0.4), (33, 2.05)] {
            let p = chain(n, 1.0);
            let a = operator(&p, omega);
            let g: Vec<Vec<f64>> = (0..=n)
                .map(|x| (0..=n).map(|y| green(x, y, omega, &p).unwrap()).collect())
                .collect();
            let scale = g.iter().flatten().fold(1.0f64, |m, v| m.max(v.abs()));
            for x in 0..=n {
                for y in 0..=n {
                    let v: f64 = (0..=n).map(|k| a[x][k] * g[k][y]).sum();
                    let id = if x == y { 1.0 } else { 0.0 };
                    assert!((v - id).abs() <= 1e-10 * scale, "n={n} ({x},{y}) {v}");
                }
            }
        }
    }

    #[test]
    fn table_matches_pointwise_and_reads_back() {
        let p = chain(11, 0.7);
        let omega = 1.3;
        let t = greens_table(omega, &p).unwrap();
        for x in 0..=11 {
            assert_abs_diff_eq!(t.g0_site[x], green(0, x, omega, &p).unwrap(), epsilon = 1e-12);
            assert_abs_diff_eq!(t.g1_site[x], green(x, 11, omega, &p).unwrap(), epsilon = 1e-12);
        }
        assert_abs_diff_eq!(t.g0, t.g1_site[11], epsilon = 1e-12);
        assert_abs_diff_eq!(t.g1, t.g1_site[0], epsilon = 1e-12);
        let (g0, g1) = endpoint_greens(omega, &p).unwrap();
        assert_abs_diff_eq!(g0, t.g0, epsilon = 1e-12);
        assert_abs_diff_eq!(g1, t.g1, epsilon = 1e-12);
    }

    #[test]
    fn resonance_is_an_error() {
        let p = chain(10, 1.0);
        let w3 = p.mode_frequency(3);
        assert!(matches!(green(0, 0, w3, &p), Err(Error::Resonance { mode: 3, .. })));
        assert!(greens_table(w3, &p).is_err());
        assert!(endpoint_greens(1.0, &p).is_err());
    }

    #[test]
    fn outside_band_endpoint_trend() {
        let p = chain(2000, 1.0);
        let (g0, g1) = endpoint_greens(3.0, &p).unwrap();
        assert!(g1.abs() < 1e-10);
        // −1/2 + 4/(2√32)
        assert_abs_diff_eq!(g0, -0.146_446_609_406_726_2, epsilon = 1e-2);
    }

    #[test]
    fn regularized_two_site_example() {
        let r = regularized_endpoints(1, &chain(1, 1.0)).unwrap();
        assert_abs_diff_eq!(r.gbar0, -0.25, epsilon = 1e-15);
        assert_abs_diff_eq!(r.gbar1, -0.25, epsilon = 1e-15);
        assert_abs_diff_eq!(r.s, -0.5, epsilon = 1e-15);
    }

    #[test]
    fn regularized_is_the_pole_subtracted_limit() {
        let p = chain(10, 1.0);
        let j = 3;
        let reg = regularized_endpoints(j, &p).unwrap();
        let wj2 = p.mode_frequency(j).powi(2);
        let eps = 1e-8;
        // ω² = ω_j² − ε keeps ω outside the resonance guard's window
        let omega = (wj2 - eps).sqrt();
        assert!(!classify(omega, &p).is_resonant());
        let g = green(0, 0, omega, &p).unwrap();
        let gap = p.mode_gap(j, omega);
        let pole = 2.0 * half_angle(j, 10).cos().powi(2) / 11.0 / gap;
        assert_abs_diff_eq!(g - pole, reg.gbar0, epsilon = 1e-4);
    }

    #[test]
    fn pole_coefficient_fit() {
        // along ω² = ω_j² + ε the j-th summand is −w_j(−1)^{js}/ε
        let p = chain(12, 1.0);
        for j in [0, 1, 5, 12] {
            let wj2 = p.mode_frequency(j).powi(2);
            for (s, sign) in [(0, 1.0), (1, parity(j))] {
                let eps = [1e-5, 5e-6];
                let gs: Vec<f64> = eps
                    .iter()
                    .map(|e| {
                        let split = endpoint_split((wj2 + e).sqrt(), &p);
                        if s == 0 {
                            split.g0()
                        } else {
                            split.g1()
                        }
                    })
                    .collect();
                // εG = c + gε + O(ε²), eliminate g
                let c = (eps[1] * eps[0] * gs[0] - eps[0] * eps[1] * gs[1]) / (eps[1] - eps[0]);
                let expect = -sign * endpoint_weight(j, 12);
                assert!(
                    ((c - expect) / expect).abs() < 1e-6,
                    "j={j} s={s} c={c} expect={expect}"
                );
            }
        }
    }

    #[test]
    fn regularized_sum_stays_bounded() {
        let p = chain(50, 1.0);
        for j in 0..=50 {
            let r = regularized_endpoints(j, &p).unwrap();
            assert!(r.s.is_finite() && r.s.abs() < 10.0 * 50.0, "j={j} S={}", r.s);
        }
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let p = chain(10, 1.0);
        let omega: f64 = 1.55;
        let d = endpoint_derivatives(omega, &p).unwrap();
        let h = 1e-6;
        let at = |w2: f64| {
            let w = w2.sqrt();
            let (g0, g1) = endpoint_greens(w, &p).unwrap();
            let (r0, r1) = gradient_sums(w, &p).unwrap();
            [g0, g1, r0, r1]
        };
        let (plus, minus) = (at(omega * omega + h), at(omega * omega - h));
        let fd: Vec<f64> = (0..4).map(|i| (plus[i] - minus[i]) / (2.0 * h)).collect();
        for (a, f) in [d.i0, d.i1, d.j0, d.j1].iter().zip(&fd) {
            assert!(((a - f) / a).abs() < 1e-6, "{a} vs {f}");
        }
    }

    #[test]
    fn infinite_green_examples() {
        assert_abs_diff_eq!(infinite_green(0, 0.0, 1.0).unwrap(), 1.0 / 5f64.sqrt(), epsilon = 1e-15);
        assert!(infinite_green(0, 3.0, 1.0).unwrap() < 0.0);
        assert!(infinite_green(0, 1.5, 1.0).is_err());
        assert!(infinite_green(0, 1.0, 1.0).is_err());
        assert!(infinite_green(0, 5f64.sqrt(), 1.0).is_err());
    }

    #[test]
    fn infinite_green_matches_branch_formulas() {
        // both displayed closed forms, written out independently of the root λ
        let literal = |x: i64, w: f64, w0: f64| -> f64 {
            let (a, b) = (w0 * w0 - w * w, 4.0 + w0 * w0 - w * w);
            if w0 * w0 > w * w {
                (a * b).powf(-0.5) * (1.0 + 0.5 * a + 0.5 * (a * b).sqrt()).powi(-(x.abs() as i32))
            } else {
                let (c, d) = (w * w - w0 * w0, w * w - w0 * w0 - 4.0);
                -(c * d).powf(-0.5) * (1.0 - 0.5 * c - 0.5 * (c * d).sqrt()).powi(-(x.abs() as i32))
            }
        };
        for (w, w0) in [(0.0, 1.0), (0.7, 1.0), (3.0, 1.0), (2.5, 0.0), (7.0, 2.0)] {
            for x in -6..=6 {
                let v = infinite_green(x, w, w0).unwrap();
                assert!((v - literal(x, w, w0)).abs() < 1e-13 * literal(0, w, w0).abs());
            }
        }
    }

    #[test]
    fn infinite_green_solves_the_lattice_equation() {
        let (w, w0) = (3.0, 1.0);
        let shift = w0 * w0 - w * w;
        for x in -30i64..=30 {
            let g = |k: i64| infinite_green(k, w, w0).unwrap();
            let v = (2.0 + shift) * g(x) - g(x - 1) - g(x + 1);
            let delta = if x == 0 { 1.0 } else { 0.0 };
            assert!((v - delta).abs() < 1e-10, "x={x} {v}");
        }
        let ratio = |x: i64| infinite_green(x + 1, w, w0).unwrap() / infinite_green(x, w, w0).unwrap();
        for x in 0..10 {
            assert_abs_diff_eq!(ratio(x), ratio(0), epsilon = 1e-12);
        }
    }
}

//! Globally adaptive Gauss–Kronrod quadrature (7/15 point pair) for
//! complex-valued integrands on the real line, plus its tensor-product
//! extension to rectangles.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use num_complex::Complex64;

const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// Nodes on [-1, 1] with Kronrod and (embedded) Gauss weights.
struct Rule {
    nodes: [f64; 15],
    kronrod: [f64; 15],
    gauss: [f64; 15],
}

const fn build_rule() -> Rule {
    let mut nodes = [0.0; 15];
    let mut kronrod = [0.0; 15];
    let mut gauss = [0.0; 15];
    let mut i = 0;
    while i < 7 {
        nodes[i] = -XGK[i];
        nodes[14 - i] = XGK[i];
        kronrod[i] = WGK[i];
        kronrod[14 - i] = WGK[i];
        if i % 2 == 1 {
            gauss[i] = WG[i / 2];
            gauss[14 - i] = WG[i / 2];
        }
        i += 1;
    }
    nodes[7] = 0.0;
    kronrod[7] = WGK[7];
    gauss[7] = WG[3];
    Rule {
        nodes,
        kronrod,
        gauss,
    }
}

static RULE: Rule = build_rule();

#[derive(Debug, Clone, Copy)]
pub struct QuadOutcome {
    pub value: Complex64,
    pub error: f64,
    /// Kronrod estimate of the integral of |f|.
    pub abs_mass: f64,
    pub evals: usize,
    pub converged: bool,
    /// Convergence was granted by the cancellation floor rather than the
    /// relative tolerance.
    pub floor_limited: bool,
}

#[derive(Debug, Clone, Copy)]
pub struct QuadLimits {
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Accept an error of `mass_rel * ∫|f|` regardless of `|I|`; this is the
    /// cancellation floor below which refinement cannot make progress.
    pub mass_rel: f64,
    pub max_evals: usize,
}

impl QuadLimits {
    fn target(&self, value: Complex64, mass: f64) -> f64 {
        (self.rel_tol * value.norm())
            .max(self.abs_tol)
            .max(self.mass_rel * mass)
    }
}

struct Segment {
    a: f64,
    b: f64,
    value: Complex64,
    error: f64,
    mass: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn gk15<F: FnMut(f64) -> Complex64>(f: &mut F, a: f64, b: f64) -> Segment {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut vals = [Complex64::new(0.0, 0.0); 15];
    let mut k = Complex64::new(0.0, 0.0);
    let mut g = Complex64::new(0.0, 0.0);
    let mut mass = 0.0;
    for i in 0..15 {
        let v = f(c + h * RULE.nodes[i]);
        vals[i] = v;
        k += v * RULE.kronrod[i];
        g += v * RULE.gauss[i];
        mass += v.norm() * RULE.kronrod[i];
    }
    let mean = k * 0.5;
    let mut asc = 0.0;
    for i in 0..15 {
        asc += RULE.kronrod[i] * (vals[i] - mean).norm();
    }
    let value = k * h;
    let mass = mass * h.abs();
    let asc = asc * h.abs();
    let mut err = ((k - g) * h).norm();
    if asc != 0.0 && err != 0.0 {
        err = asc * (200.0 * err / asc).powf(1.5).min(1.0);
    }
    if mass > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * mass);
    }
    Segment {
        a,
        b,
        value,
        error: err,
        mass,
    }
}

/// Integrates `f` over `[breaks[0], breaks[last]]`, starting from the given
/// partition and bisecting the worst segment until the summed error estimate
/// falls below `max(rel_tol * |I|, abs_tol)`.
pub fn integrate<F: FnMut(f64) -> Complex64>(
    mut f: F,
    breaks: &[f64],
    limits: QuadLimits,
) -> QuadOutcome {
    let mut heap = BinaryHeap::new();
    let mut value = Complex64::new(0.0, 0.0);
    let mut error = 0.0;
    let mut mass = 0.0;
    let mut evals = 0;
    for w in breaks.windows(2) {
        if w[1] <= w[0] {
            continue;
        }
        let seg = gk15(&mut f, w[0], w[1]);
        evals += 15;
        value += seg.value;
        error += seg.error;
        mass += seg.mass;
        heap.push(seg);
    }
    let mut converged = false;
    let mut refreshed = 0usize;
    loop {
        let target = limits.target(value, mass);
        if error <= target {
            converged = true;
            break;
        }
        if evals + 30 > limits.max_evals {
            break;
        }
        let Some(worst) = heap.pop() else { break };
        let mid = 0.5 * (worst.a + worst.b);
        if !(mid > worst.a && mid < worst.b) || (worst.b - worst.a) < 1e-14 * mid.abs().max(1.0)
        {
            // cannot refine further; roundoff-limited
            heap.push(worst);
            break;
        }
        let left = gk15(&mut f, worst.a, mid);
        let right = gk15(&mut f, mid, worst.b);
        evals += 30;
        value += left.value + right.value - worst.value;
        error += left.error + right.error - worst.error;
        mass += left.mass + right.mass - worst.mass;
        heap.push(left);
        heap.push(right);
        refreshed += 1;
        if refreshed.is_multiple_of(64) {
            // resum to shed accumulated cancellation in the running totals
            value = heap.iter().map(|s| s.value).sum();
            error = heap.iter().map(|s| s.error).sum();
            mass = heap.iter().map(|s| s.mass).sum();
        }
    }
    value = heap.iter().map(|s| s.value).sum();
    error = heap.iter().map(|s| s.error).sum();
    if !converged {
        converged = error <= limits.target(value, mass);
    }
    let floor_limited = converged && error > (limits.rel_tol * value.norm()).max(limits.abs_tol);
    QuadOutcome {
        value,
        error,
        abs_mass: mass,
        evals,
        converged,
        floor_limited,
    }
}

struct Cell {
    u: (f64, f64),
    v: (f64, f64),
    value: Complex64,
    err_u: f64,
    err_v: f64,
    mass: f64,
}

impl Cell {
    fn error(&self) -> f64 {
        self.err_u + self.err_v
    }
}

impl PartialEq for Cell {
    fn eq(&self, other: &Self) -> bool {
        self.error() == other.error()
    }
}
impl Eq for Cell {}
impl PartialOrd for Cell {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Cell {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error().total_cmp(&other.error())
    }
}

fn gk15x15<F: FnMut(f64, f64) -> Complex64>(f: &mut F, u: (f64, f64), v: (f64, f64)) -> Cell {
    let (cu, hu) = (0.5 * (u.0 + u.1), 0.5 * (u.1 - u.0));
    let (cv, hv) = (0.5 * (v.0 + v.1), 0.5 * (v.1 - v.0));
    let mut vals = [[Complex64::new(0.0, 0.0); 15]; 15];
    let mut kk = Complex64::new(0.0, 0.0);
    let mut gk = Complex64::new(0.0, 0.0);
    let mut kg = Complex64::new(0.0, 0.0);
    let mut mass = 0.0;
    for j in 0..15 {
        let vv = cv + hv * RULE.nodes[j];
        let mut row_k = Complex64::new(0.0, 0.0);
        let mut row_g = Complex64::new(0.0, 0.0);
        let mut row_m = 0.0;
        for i in 0..15 {
            let val = f(cu + hu * RULE.nodes[i], vv);
            vals[j][i] = val;
            row_k += val * RULE.kronrod[i];
            row_g += val * RULE.gauss[i];
            row_m += val.norm() * RULE.kronrod[i];
        }
        kk += row_k * RULE.kronrod[j];
        gk += row_g * RULE.kronrod[j];
        kg += row_k * RULE.gauss[j];
        mass += row_m * RULE.kronrod[j];
    }
    let mean = kk * 0.25;
    let mut asc = 0.0;
    for j in 0..15 {
        for i in 0..15 {
            asc += RULE.kronrod[j] * RULE.kronrod[i] * (vals[j][i] - mean).norm();
        }
    }
    let area = hu * hv;
    let value = kk * area;
    let mass = mass * area.abs();
    let asc = asc * area.abs();
    let floor = 50.0 * f64::EPSILON * mass;
    // same heuristic rescaling of the embedded-rule difference as in 1D
    let rescale = |raw: f64| {
        if asc != 0.0 && raw != 0.0 {
            asc * (200.0 * raw / asc).powf(1.5).min(1.0)
        } else {
            raw
        }
    };
    Cell {
        u,
        v,
        value,
        err_u: rescale(((kk - gk) * area).norm()).max(floor),
        err_v: rescale(((kk - kg) * area).norm()).max(floor),
        mass,
    }
}

/// Tensor-product analogue of [`integrate`] over the rectangle spanned by
/// the break lists; each refinement bisects the worst cell along the axis
/// with the larger embedded-rule error.
pub fn integrate_2d<F: FnMut(f64, f64) -> Complex64>(
    mut f: F,
    u_breaks: &[f64],
    v_breaks: &[f64],
    limits: QuadLimits,
) -> QuadOutcome {
    let mut heap = BinaryHeap::new();
    let mut evals = 0usize;
    for wv in v_breaks.windows(2) {
        for wu in u_breaks.windows(2) {
            if wu[1] <= wu[0] || wv[1] <= wv[0] {
                continue;
            }
            heap.push(gk15x15(&mut f, (wu[0], wu[1]), (wv[0], wv[1])));
            evals += 225;
        }
    }
    let mut value: Complex64 = heap.iter().map(|c| c.value).sum();
    let mut error: f64 = heap.iter().map(|c| c.error()).sum();
    let mut mass: f64 = heap.iter().map(|c| c.mass).sum();
    let mut converged = false;
    let mut refreshed = 0usize;
    loop {
        let target = limits.target(value, mass);
        if error <= target {
            converged = true;
            break;
        }
        if evals + 450 > limits.max_evals {
            break;
        }
        let Some(worst) = heap.pop() else { break };
        let (a, b) = if worst.err_u >= worst.err_v {
            let mid = 0.5 * (worst.u.0 + worst.u.1);
            (
                gk15x15(&mut f, (worst.u.0, mid), worst.v),
                gk15x15(&mut f, (mid, worst.u.1), worst.v),
            )
        } else {
            let mid = 0.5 * (worst.v.0 + worst.v.1);
            (
                gk15x15(&mut f, worst.u, (worst.v.0, mid)),
                gk15x15(&mut f, worst.u, (mid, worst.v.1)),
            )
        };
        evals += 450;
        value += a.value + b.value - worst.value;
        error += a.error() + b.error() - worst.error();
        mass += a.mass + b.mass - worst.mass;
        heap.push(a);
        heap.push(b);
        refreshed += 1;
        if refreshed.is_multiple_of(64) {
            value = heap.iter().map(|c| c.value).sum();
            error = heap.iter().map(|c| c.error()).sum();
            mass = heap.iter().map(|c| c.mass).sum();
        }
    }
    value = heap.iter().map(|c| c.value).sum();
    error = heap.iter().map(|c| c.error()).sum();
    if !converged {
        converged = error <= limits.target(value, mass);
    }
    let floor_limited = converged && error > (limits.rel_tol * value.norm()).max(limits.abs_tol);
    QuadOutcome {
        value,
        error,
        abs_mass: mass,
        evals,
        converged,
        floor_limited,
    }
}

//! Small numeric helpers shared across modules: compensated summation,
//! double-single arithmetic for series accumulation, and a fast positive
//! `pow` used in mesh-weight kernels.

/// Neumaier compensated accumulator. One rounding error of the final add
/// is the only loss; partial cancellation inside the stream is recovered.
#[derive(Debug, Clone, Copy, Default)]
pub struct Neumaier {
    sum: f64,
    comp: f64,
}

impl Neumaier {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// Unevaluated sum `hi + lo` with `|lo| <= ulp(hi)/2`. Enough precision to
/// keep long alternating series honest without pulling in a big-float crate.
#[derive(Debug, Clone, Copy)]
pub struct Dd {
    pub hi: f64,
    pub lo: f64,
}

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    let err = (a - (s - bb)) + (b - bb);
    (s, err)
}

#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

impl Dd {
    #[inline]
    pub fn from_f(x: f64) -> Self {
        Dd { hi: x, lo: 0.0 }
    }

    #[inline]
    pub fn add(self, other: Dd) -> Self {
        let (s, e) = two_sum(self.hi, other.hi);
        let lo = e + self.lo + other.lo;
        let (hi, lo) = two_sum(s, lo);
        Dd { hi, lo }
    }

    #[inline]
    pub fn mul_f(self, b: f64) -> Self {
        let (p, e) = two_prod(self.hi, b);
        let lo = e + self.lo * b;
        let (hi, lo) = two_sum(p, lo);
        Dd { hi, lo }
    }

    #[inline]
    pub fn value(self) -> f64 {
        self.hi + self.lo
    }
}

const TWO_OVER_LN2: f64 = 2.885_390_081_777_926_8;

/// `base^e` for finite `base > 0` via `exp2(e * log2 base)`.
///
/// Relative error stays below ~1e-13 for `|e * log2 base| <= 700`; callers
/// use it in O(M^2) mesh-weight loops where `f64::powf` dominates runtime.
#[inline]
pub fn fast_pow(base: f64, e: f64) -> f64 {
    debug_assert!(base > 0.0 && base.is_finite());
    let bits = base.to_bits();
    let mut n = (((bits >> 52) & 0x7ff) as i64) - 1023;
    let mut m = f64::from_bits((bits & ((1u64 << 52) - 1)) | (1023u64 << 52));
    if m > std::f64::consts::SQRT_2 {
        m *= 0.5;
        n += 1;
    }
    // log2(m) = (2/ln2) * atanh(u), u = (m-1)/(m+1), |u| <= 0.1716
    let u = (m - 1.0) / (m + 1.0);
    let u2 = u * u;
    let mut s = 1.0 / 19.0;
    for k in (0..9).rev() {
        s = s * u2 + 1.0 / (2 * k + 1) as f64;
    }
    let lg = n as f64 + u * TWO_OVER_LN2 * s;
    let w = e * lg;
    debug_assert!(w.abs() < 1000.0);
    // exp2(w) = 2^k * exp(f * ln 2), f = w - k, |f| <= 1/2
    let k = w.round();
    let f = w - k;
    let t = f * std::f64::consts::LN_2;
    let mut p = 1.0 / 6_227_020_800.0; // 1/13!
    const INV_FACT: [f64; 13] = [
        1.0,
        1.0,
        0.5,
        1.0 / 6.0,
        1.0 / 24.0,
        1.0 / 120.0,
        1.0 / 720.0,
        1.0 / 5040.0,
        1.0 / 40320.0,
        1.0 / 362880.0,
        1.0 / 3628800.0,
        1.0 / 39916800.0,
        1.0 / 479001600.0,
    ];
    for i in (0..13).rev() {
        p = p * t + INV_FACT[i];
    }
    let scale = f64::from_bits(((1023 + k as i64) as u64) << 52);
    p * scale
}

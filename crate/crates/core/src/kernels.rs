//! The kernel zoo: exact univariate evaluation, domains, and the static
//! admissibility metadata each family carries.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gram::PointSet;

/// Highest B-spline order accepted; the Cox-de Boor recursion is exact enough
/// in double precision up to here.
pub const MAX_BSPLINE_ORDER: u32 = 6;

/// Kernel family and its shape parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum KernelFamily {
    /// `exp(-|s - t|)`.
    Exponential,
    /// `min(s, t) - s t` on `(0, 1)`.
    BrownianBridge,
    /// `exp(-(s - t)^2 / sigma)`.
    Gaussian { sigma: f64 },
    /// `(1 + (s - t)^2)^(-beta)`.
    InverseMultiquadric { beta: f64 },
    /// Wendland-type `(1 - r)^2_+`.
    WendlandD3K0,
    /// Wendland-type `(1 - r)^4_+ (1 + 4 r)`.
    WendlandD3K1,
    /// Centered cardinal B-spline of the given order (degree `order - 1`).
    BSpline { order: u32 },
    /// `sin(pi r) / (pi r)`.
    Sinc,
}

impl KernelFamily {
    pub fn name(&self) -> &'static str {
        match self {
            KernelFamily::Exponential => "exponential",
            KernelFamily::BrownianBridge => "brownian_bridge",
            KernelFamily::Gaussian { .. } => "gaussian",
            KernelFamily::InverseMultiquadric { .. } => "inverse_multiquadric",
            KernelFamily::WendlandD3K0 => "wendland_d3_k0",
            KernelFamily::WendlandD3K1 => "wendland_d3_k1",
            KernelFamily::BSpline { .. } => "bspline",
            KernelFamily::Sinc => "sinc",
        }
    }

    fn validate(&self) -> Result<()> {
        match *self {
            KernelFamily::Gaussian { sigma } if !(sigma > 0.0 && sigma.is_finite()) => Err(
                Error::InvalidKernel(format!("gaussian sigma must be positive, got {sigma}")),
            ),
            KernelFamily::InverseMultiquadric { beta } if !(beta > 0.0 && beta.is_finite()) => {
                Err(Error::InvalidKernel(format!(
                    "inverse multiquadric beta must be positive, got {beta}"
                )))
            }
            KernelFamily::BSpline { order } if !(2..=MAX_BSPLINE_ORDER).contains(&order) => {
                Err(Error::InvalidKernel(format!(
                    "B-spline order must lie in 2..={MAX_BSPLINE_ORDER}, got {order}"
                )))
            }
            _ => Ok(()),
        }
    }
}

impl fmt::Display for KernelFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            KernelFamily::Gaussian { sigma } => write!(f, "gaussian(sigma={sigma})"),
            KernelFamily::InverseMultiquadric { beta } => {
                write!(f, "inverse_multiquadric(beta={beta})")
            }
            KernelFamily::BSpline { order } => write!(f, "bspline(order={order})"),
            other => f.write_str(other.name()),
        }
    }
}

/// Status of one admissibility condition as established analytically.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Status {
    Proven,
    Disproven,
    Unknown,
}

/// Static status of the four admissibility conditions for a kernel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Admissibility {
    /// Nonsingular Gram matrices for distinct points.
    pub a1: Status,
    /// Uniform boundedness.
    pub a2: Status,
    /// Injectivity on absolutely summable expansions.
    pub a3: Status,
    /// Unit bound on the Lebesgue function.
    pub a4: Status,
}

impl Admissibility {
    const UNKNOWN: Admissibility = Admissibility {
        a1: Status::Unknown,
        a2: Status::Unknown,
        a3: Status::Unknown,
        a4: Status::Unknown,
    };

    pub fn is_admissible(&self) -> bool {
        [self.a1, self.a2, self.a3, self.a4]
            .iter()
            .all(|s| *s == Status::Proven)
    }
}

/// A real interval with independently open or closed endpoints. Infinite
/// endpoints serialize as `null`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    #[serde(with = "inf_as_null::lower")]
    pub lo: f64,
    #[serde(with = "inf_as_null::upper")]
    pub hi: f64,
    #[serde(default)]
    pub lo_open: bool,
    #[serde(default)]
    pub hi_open: bool,
}

impl Interval {
    pub const REAL_LINE: Interval = Interval {
        lo: f64::NEG_INFINITY,
        hi: f64::INFINITY,
        lo_open: true,
        hi_open: true,
    };

    pub fn closed(lo: f64, hi: f64) -> Self {
        Interval {
            lo,
            hi,
            lo_open: false,
            hi_open: false,
        }
    }

    pub fn open(lo: f64, hi: f64) -> Self {
        Interval {
            lo,
            hi,
            lo_open: true,
            hi_open: true,
        }
    }

    pub fn contains(&self, v: f64) -> bool {
        if v.is_nan() {
            return false;
        }
        let above = if self.lo_open { v > self.lo } else { v >= self.lo };
        let below = if self.hi_open { v < self.hi } else { v <= self.hi };
        above && below
    }

    pub fn is_bounded(&self) -> bool {
        self.lo.is_finite() && self.hi.is_finite()
    }

    pub fn length(&self) -> f64 {
        self.hi - self.lo
    }

    fn is_subset_of(&self, other: &Interval) -> bool {
        let lo_ok = self.lo > other.lo || (self.lo == other.lo && (self.lo_open || !other.lo_open));
        let hi_ok = self.hi < other.hi || (self.hi == other.hi && (self.hi_open || !other.hi_open));
        lo_ok && hi_ok
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}{}, {}{}",
            if self.lo_open { '(' } else { '[' },
            self.lo,
            self.hi,
            if self.hi_open { ')' } else { ']' }
        )
    }
}

mod inf_as_null {
    macro_rules! bound {
        ($name:ident, $inf:expr) => {
            pub mod $name {
                use serde::{Deserialize, Deserializer, Serializer};

                pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
                    if v.is_finite() {
                        s.serialize_f64(*v)
                    } else {
                        s.serialize_none()
                    }
                }

                pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
                    Ok(Option::<f64>::deserialize(d)?.unwrap_or($inf))
                }
            }
        };
    }
    bound!(lower, f64::NEG_INFINITY);
    bound!(upper, f64::INFINITY);
}

/// A univariate kernel on a real interval.
///
/// Serializes as `{"family": "...", "params": {...}, "domain": {...}}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "KernelSpecRepr", into = "KernelSpecRepr")]
pub struct KernelSpec {
    family: KernelFamily,
    domain: Interval,
}

impl KernelSpec {
    /// Kernel on its natural domain: `(0, 1)` for the Brownian bridge, the
    /// real line for everything else.
    pub fn new(family: KernelFamily) -> Result<Self> {
        family.validate()?;
        Ok(KernelSpec {
            family,
            domain: Self::natural_domain(&family),
        })
    }

    pub fn exponential() -> Self {
        KernelSpec::new(KernelFamily::Exponential).expect("valid")
    }

    pub fn brownian_bridge() -> Self {
        KernelSpec::new(KernelFamily::BrownianBridge).expect("valid")
    }

    pub fn gaussian(sigma: f64) -> Result<Self> {
        KernelSpec::new(KernelFamily::Gaussian { sigma })
    }

    /// Restricts the kernel to `domain`, which must lie inside the natural
    /// domain of the family.
    pub fn with_domain(mut self, domain: Interval) -> Result<Self> {
        if !(domain.lo < domain.hi) {
            return Err(Error::InvalidKernel(format!("empty domain {domain}")));
        }
        let natural = Self::natural_domain(&self.family);
        if !domain.is_subset_of(&natural) {
            return Err(Error::InvalidKernel(format!(
                "domain {domain} is not inside {natural} for {}",
                self.family
            )));
        }
        self.domain = domain;
        Ok(self)
    }

    fn natural_domain(family: &KernelFamily) -> Interval {
        match family {
            KernelFamily::BrownianBridge => Interval::open(0.0, 1.0),
            _ => Interval::REAL_LINE,
        }
    }

    pub fn family(&self) -> KernelFamily {
        self.family
    }

    pub fn domain(&self) -> Interval {
        self.domain
    }

    pub fn name(&self) -> String {
        self.family.to_string()
    }

    /// Known admissibility status of the family.
    pub fn metadata(&self) -> Admissibility {
        use Status::*;
        match self.family {
            KernelFamily::Exponential | KernelFamily::BrownianBridge => Admissibility {
                a1: Proven,
                a2: Proven,
                a3: Proven,
                a4: Proven,
            },
            KernelFamily::Gaussian { .. } => Admissibility {
                a4: Disproven,
                ..Admissibility::UNKNOWN
            },
            KernelFamily::InverseMultiquadric { beta: 0.5 } => Admissibility {
                a4: Disproven,
                ..Admissibility::UNKNOWN
            },
            KernelFamily::Sinc => Admissibility {
                a3: Disproven,
                ..Admissibility::UNKNOWN
            },
            _ => Admissibility::UNKNOWN,
        }
    }

    /// Declared bound `M` with `|K(s, t)| <= M` on the domain.
    pub fn bound(&self) -> f64 {
        match self.family {
            KernelFamily::BrownianBridge => 0.25,
            _ => 1.0,
        }
    }

    /// `K(s, t)`, failing when either argument is outside the domain.
    pub fn eval(&self, s: f64, t: f64) -> Result<f64> {
        self.check(s)?;
        self.check(t)?;
        Ok(self.eval_unchecked(s, t))
    }

    pub fn check(&self, v: f64) -> Result<()> {
        if self.domain.contains(v) {
            Ok(())
        } else {
            Err(Error::Domain {
                value: v,
                domain: self.domain.to_string(),
            })
        }
    }

    /// Evaluation without the domain check. Radial families are evaluated at
    /// `|s - t|`, which makes every family exactly symmetric.
    pub(crate) fn eval_unchecked(&self, s: f64, t: f64) -> f64 {
        let r = (s - t).abs();
        match self.family {
            KernelFamily::Exponential => (-r).exp(),
            KernelFamily::BrownianBridge => s.min(t) - s * t,
            KernelFamily::Gaussian { sigma } => (-(r * r) / sigma).exp(),
            KernelFamily::InverseMultiquadric { beta } => (1.0 + r * r).powf(-beta),
            KernelFamily::WendlandD3K0 => {
                let u = (1.0 - r).max(0.0);
                u * u
            }
            KernelFamily::WendlandD3K1 => {
                let u = (1.0 - r).max(0.0);
                u.powi(4) * (1.0 + 4.0 * r)
            }
            KernelFamily::BSpline { order } => centered_bspline(order, r),
            KernelFamily::Sinc => sinc(r),
        }
    }

    /// Rejects kernels that are known to break the sparse learning setup.
    pub fn ensure_fittable(&self) -> Result<()> {
        if self.metadata().a3 == Status::Disproven {
            return Err(Error::UnfittableKernel {
                kernel: self.name(),
                reason: "it fails the l1 injectivity condition (A3), so coefficient norms \
                         do not define a norm on the function space"
                    .into(),
            });
        }
        Ok(())
    }
}

impl fmt::Display for KernelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} on {}", self.family, self.domain)
    }
}

fn sinc(r: f64) -> f64 {
    if r == 0.0 {
        1.0
    } else if r.fract() == 0.0 {
        // sin(pi k) does not round to zero in floating point.
        0.0
    } else {
        (PI * r).sin() / (PI * r)
    }
}

/// Centered cardinal B-spline of order `p` evaluated at `x`, via Cox-de Boor
/// on the integer knots `0, 1, ..., p`.
pub(crate) fn centered_bspline(p: u32, x: f64) -> f64 {
    cardinal_bspline(p, x + p as f64 / 2.0)
}

fn cardinal_bspline(p: u32, x: f64) -> f64 {
    let p_f = p as f64;
    if p == 1 {
        return if (0.0..1.0).contains(&x) { 1.0 } else { 0.0 };
    }
    if x <= 0.0 || x >= p_f {
        return 0.0;
    }
    (x * cardinal_bspline(p - 1, x) + (p_f - x) * cardinal_bspline(p - 1, x - 1.0)) / (p_f - 1.0)
}

/// Cardinal coefficients `K[x]^{-1} K_x(t)` in closed form, for the two
/// kernels where they are known explicitly. The result follows the order of
/// `points`, not the sorted order.
pub fn closed_form_cardinal(kernel: &KernelSpec, points: &PointSet, t: f64) -> Result<Vec<f64>> {
    let exponential = match kernel.family() {
        KernelFamily::Exponential => true,
        KernelFamily::BrownianBridge => false,
        _ => return Err(Error::UnsupportedKernel(kernel.name())),
    };
    kernel.check(t)?;
    for &x in points.as_slice() {
        kernel.check(x)?;
    }

    let n = points.len();
    let order = points.sorted_order();
    let xs: Vec<f64> = order.iter().map(|&i| points.as_slice()[i]).collect();
    let mut out = vec![0.0; n];

    if let Some(j) = xs.iter().position(|&x| x == t) {
        out[order[j]] = 1.0;
        return Ok(out);
    }

    let first = xs[0];
    let last = xs[n - 1];
    if t < first {
        out[order[0]] = if exponential { (t - first).exp() } else { t / first };
    } else if t > last {
        out[order[n - 1]] = if exponential {
            (last - t).exp()
        } else {
            (1.0 - t) / (1.0 - last)
        };
    } else {
        // t strictly inside a gap (xs[j], xs[j + 1])
        let j = xs.partition_point(|&x| x < t) - 1;
        let (a, b) = (xs[j], xs[j + 1]);
        let (left, right) = if exponential {
            let gap = (b - a).sinh();
            ((b - t).sinh() / gap, (t - a).sinh() / gap)
        } else {
            ((b - t) / (b - a), (t - a) / (b - a))
        };
        out[order[j]] = left;
        out[order[j + 1]] = right;
    }
    Ok(out)
}

#[derive(Serialize, Deserialize)]
struct KernelSpecRepr {
    family: String,
    #[serde(default)]
    params: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    domain: Option<Interval>,
}

impl From<KernelSpec> for KernelSpecRepr {
    fn from(k: KernelSpec) -> Self {
        let mut params = BTreeMap::new();
        match k.family {
            KernelFamily::Gaussian { sigma } => {
                params.insert("sigma".to_string(), sigma);
            }
            KernelFamily::InverseMultiquadric { beta } => {
                params.insert("beta".to_string(), beta);
            }
            KernelFamily::BSpline { order } => {
                params.insert("order".to_string(), order as f64);
            }
            _ => {}
        }
        let natural = KernelSpec::natural_domain(&k.family);
        KernelSpecRepr {
            family: k.family.name().to_string(),
            params,
            domain: (k.domain != natural).then_some(k.domain),
        }
    }
}

impl TryFrom<KernelSpecRepr> for KernelSpec {
    type Error = Error;

    fn try_from(repr: KernelSpecRepr) -> Result<Self> {
        let family = parse_family(&repr.family, &repr.params)?;
        let spec = KernelSpec::new(family)?;
        match repr.domain {
            Some(d) => spec.with_domain(d),
            None => Ok(spec),
        }
    }
}

fn parse_family(name: &str, params: &BTreeMap<String, f64>) -> Result<KernelFamily> {
    let param = |key: &str, default: Option<f64>| -> Result<f64> {
        params
            .get(key)
            .copied()
            .or(default)
            .ok_or_else(|| Error::InvalidKernel(format!("{name} requires parameter `{key}`")))
    };
    let normalized = name.trim().to_ascii_lowercase().replace(['-', ' '], "_");
    let family = match normalized.as_str() {
        "exponential" | "exp" | "laplace" => KernelFamily::Exponential,
        "brownian_bridge" | "brownianbridge" => KernelFamily::BrownianBridge,
        "gaussian" => KernelFamily::Gaussian {
            sigma: param("sigma", Some(1.0))?,
        },
        "inverse_multiquadric" | "imq" => KernelFamily::InverseMultiquadric {
            beta: param("beta", Some(0.5))?,
        },
        "wendland_d3_k0" => KernelFamily::WendlandD3K0,
        "wendland_d3_k1" => KernelFamily::WendlandD3K1,
        "bspline" | "b_spline" => {
            let order = param("order", Some(2.0))?;
            if order.fract() != 0.0 || order < 0.0 {
                return Err(Error::InvalidKernel(format!(
                    "B-spline order must be an integer, got {order}"
                )));
            }
            KernelFamily::BSpline {
                order: order as u32,
            }
        }
        "sinc" => KernelFamily::Sinc,
        _ => return Err(Error::InvalidKernel(format!("unknown kernel family `{name}`"))),
    };
    Ok(family)
}

impl std::str::FromStr for KernelSpec {
    type Err = Error;

    /// Parses either a JSON object or a bare family name with default
    /// parameters.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.starts_with('{') {
            serde_json::from_str(s).map_err(|e| Error::InvalidKernel(e.to_string()))
        } else {
            KernelSpec::new(parse_family(s, &BTreeMap::new())?)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn zoo() -> Vec<KernelSpec> {
        [
            KernelFamily::Exponential,
            KernelFamily::BrownianBridge,
            KernelFamily::Gaussian { sigma: 0.7 },
            KernelFamily::InverseMultiquadric { beta: 0.5 },
            KernelFamily::WendlandD3K0,
            KernelFamily::WendlandD3K1,
            KernelFamily::BSpline { order: 2 },
            KernelFamily::BSpline { order: 5 },
            KernelFamily::Sinc,
        ]
        .into_iter()
        .map(|f| KernelSpec::new(f).unwrap())
        .collect()
    }

    #[test]
    fn point_values() {
        assert_eq!(KernelSpec::exponential().eval(0.0, 0.0).unwrap(), 1.0);
        assert_abs_diff_eq!(
            KernelSpec::brownian_bridge().eval(0.25, 0.5).unwrap(),
            0.125,
            epsilon = 1e-15
        );
        let g = KernelSpec::gaussian(1.0).unwrap();
        assert_abs_diff_eq!(g.eval(0.0, 0.5).unwrap(), 0.778_800_783_071_404_9, epsilon = 1e-12);
    }

    #[test]
    fn brownian_bridge_rejects_endpoints() {
        let k = KernelSpec::brownian_bridge();
        assert!(matches!(k.eval(0.0, 0.5), Err(Error::Domain { .. })));
        assert!(matches!(k.eval(0.5, 1.0), Err(Error::Domain { .. })));
        assert!(k.with_domain(Interval::closed(0.0, 1.0)).is_err());
        assert!(k.with_domain(Interval::closed(0.1, 0.9)).is_ok());
    }

    #[test]
    fn parameter_validation() {
        assert!(KernelSpec::gaussian(0.0).is_err());
        assert!(KernelSpec::new(KernelFamily::InverseMultiquadric { beta: -1.0 }).is_err());
        assert!(KernelSpec::new(KernelFamily::BSpline { order: 1 }).is_err());
        assert!(KernelSpec::new(KernelFamily::BSpline { order: 7 }).is_err());
    }

    #[test]
    fn metadata_table() {
        use Status::*;
        assert!(KernelSpec::exponential().metadata().is_admissible());
        assert!(KernelSpec::brownian_bridge().metadata().is_admissible());
        assert_eq!(KernelSpec::gaussian(2.0).unwrap().metadata().a4, Disproven);
        let imq = |beta| KernelSpec::new(KernelFamily::InverseMultiquadric { beta }).unwrap();
        assert_eq!(imq(0.5).metadata().a4, Disproven);
        assert_eq!(imq(1.0).metadata().a4, Unknown);
        let sinc = KernelSpec::new(KernelFamily::Sinc).unwrap().metadata();
        assert_eq!((sinc.a1, sinc.a3, sinc.a4), (Unknown, Disproven, Unknown));
    }

    #[test]
    fn bspline_shapes() {
        // order 2 is the hat function, order 4 is the cubic with B(0) = 2/3
        assert_abs_diff_eq!(centered_bspline(2, 0.0), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(centered_bspline(2, 0.25), 0.75, epsilon = 1e-15);
        assert_abs_diff_eq!(centered_bspline(4, 0.0), 2.0 / 3.0, epsilon = 1e-15);
        assert_abs_diff_eq!(centered_bspline(4, 1.0), 1.0 / 6.0, epsilon = 1e-15);
        assert_eq!(centered_bspline(3, 1.5), 0.0);
    }

    #[test]
    fn wendland_support() {
        let k0 = KernelSpec::new(KernelFamily::WendlandD3K0).unwrap();
        let k1 = KernelSpec::new(KernelFamily::WendlandD3K1).unwrap();
        assert_eq!(k0.eval(0.0, 1.5).unwrap(), 0.0);
        assert_abs_diff_eq!(k0.eval(0.0, 0.5).unwrap(), 0.25);
        assert_abs_diff_eq!(k1.eval(0.0, 0.5).unwrap(), 0.0625 * 3.0);
    }

    #[test]
    fn sinc_vanishes_on_integers() {
        let k = KernelSpec::new(KernelFamily::Sinc).unwrap();
        assert_eq!(k.eval(0.0, 3.0).unwrap(), 0.0);
        assert_abs_diff_eq!(k.eval(0.0, 0.5).unwrap(), 2.0 / PI, epsilon = 1e-15);
        assert!(k.ensure_fittable().is_err());
    }

    #[test]
    fn json_round_trip_and_names() {
        let k: KernelSpec = r#"{"family": "gaussian", "params": {"sigma": 0.5}}"#.parse().unwrap();
        assert_eq!(k.family(), KernelFamily::Gaussian { sigma: 0.5 });
        let json = serde_json::to_string(&k).unwrap();
        assert_eq!(json, r#"{"family":"gaussian","params":{"sigma":0.5}}"#);
        let back: KernelSpec = serde_json::from_str(&json).unwrap();
        assert_eq!(back, k);

        let bb: KernelSpec = "brownian-bridge".parse().unwrap();
        assert_eq!(bb.family(), KernelFamily::BrownianBridge);
        let restricted = KernelSpec::exponential()
            .with_domain(Interval::closed(-3.0, 3.0))
            .unwrap();
        let back: KernelSpec = serde_json::from_str(&serde_json::to_string(&restricted).unwrap()).unwrap();
        assert_eq!(back, restricted);
        assert!("{\"family\": \"bspline\", \"params\": {\"order\": 2.5}}"
            .parse::<KernelSpec>()
            .is_err());
        assert!("matern".parse::<KernelSpec>().is_err());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn symmetric_and_bounded(s in 0.001f64..0.999, t in 0.001f64..0.999, shift in -5.0f64..5.0) {
                for k in zoo() {
                    let (a, b) = if k.family() == KernelFamily::BrownianBridge {
                        (s, t)
                    } else {
                        (s + shift, t - shift)
                    };
                    let kst = k.eval(a, b).unwrap();
                    prop_assert_eq!(kst, k.eval(b, a).unwrap());
                    prop_assert!(kst.abs() <= k.bound() + 1e-15, "{} at ({}, {}) = {}", k, a, b, kst);
                }
            }
        }
    }
}

//! Deterministic sequences and seeded random ensembles of zeros.
//!
//! Every generator is a pure function of `(spec, n, seed)`. Sequence kinds
//! draw their randomness from one ChaCha stream in index order, so the
//! output for `n` is a prefix of the output for any larger `n`.

use std::f64::consts::{PI, TAU};
use std::path::PathBuf;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Exp1, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::polycore::poly_from_roots;
use crate::rootfind::{aberth_roots, DEFAULT_MAX_ITER, DEFAULT_TOL};
use crate::{atoms, Complex, Error, Polynomial, RationalSum, Result, RootSet};

/// `π (3 - √5)`.
pub const GOLDEN_ANGLE: f64 = 2.399_963_229_728_653;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Seed(pub u64);

impl Seed {
    /// Seed for the `i`-th independent trial (splitmix64 finalizer).
    pub fn derive(self, i: u64) -> Seed {
        let mut z = self
            .0
            .wrapping_add(0x9E37_79B9_7F4A_7C15u64.wrapping_mul(i.wrapping_add(1)));
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        Seed(z ^ (z >> 31))
    }

    pub fn rng(self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.0)
    }
}

/// Radical inverse of `k` in base `b`.
pub fn van_der_corput(mut k: u64, b: u64) -> f64 {
    let mut inv = 1.0 / b as f64;
    let mut x = 0.0;
    while k > 0 {
        x += (k % b) as f64 * inv;
        k /= b;
        inv /= b as f64;
    }
    x
}

/// `exp(2πi·vdc(k))` for `k = 0..n`.
pub fn bit_reversed_circle(n: usize) -> RootSet {
    (0..n as u64)
        .map(|k| Complex::from_polar(1.0, TAU * van_der_corput(k, 2)))
        .collect()
}

/// Halton points mapped to the unit disk: radius `sqrt(vdc₂)`, angle `2π·vdc₃`.
pub fn low_discrepancy_disk(n: usize) -> RootSet {
    (1..=n as u64)
        .map(|k| Complex::from_polar(van_der_corput(k, 2).sqrt(), TAU * van_der_corput(k, 3)))
        .collect()
}

/// `z_1 = 1`, `z_2 = -1`, and each block `z_{2^m+1..2^{m+1}}` is the first
/// `2^m` terms rotated by `e^{2πi/2^{m+1}}`.
pub fn dyadic_sequence(n: usize) -> RootSet {
    // angles as fractions of a turn are dyadic rationals, so this is exact
    let mut turns = vec![0.0, 0.5];
    let mut block = 2usize;
    while turns.len() < n {
        let step = 1.0 / (2 * block) as f64;
        for k in 0..block {
            turns.push(turns[k] + step);
        }
        block *= 2;
    }
    turns.truncate(n);
    turns.iter().map(|&t| Complex::from_polar(1.0, TAU * t)).collect()
}

/// Zeros of `Π_j (z^n - a_j^n)`: `a_j e^{2πiℓ/n}` for every radius and `ℓ`.
pub fn example1_roots(radii: &[f64], n: usize) -> Result<RootSet> {
    if radii.is_empty()
        || radii.iter().any(|&a| !(a > 0.0 && a.is_finite()))
        || radii.windows(2).any(|w| w[0] >= w[1])
    {
        return Err(Error::InvalidRadii);
    }
    Ok(radii
        .iter()
        .flat_map(|&a| (0..n).map(move |l| Complex::from_polar(a, TAU * l as f64 / n as f64)))
        .collect())
}

/// All `n·deg P` zeros of `P^n - 1`, as the union over `n`-th roots of unity
/// `ω` of the zeros of `P - ω`.
pub fn lemniscate_roots(p: &Polynomial, n: usize) -> Result<RootSet> {
    let k = p.degree();
    if k == 0 || n == 0 {
        return Err(Error::InvalidSpec(
            "lemniscate needs deg P >= 1 and n >= 1".into(),
        ));
    }
    let mut out = Vec::with_capacity(n * k);
    for j in 0..n {
        let w = Complex::from_polar(1.0, TAU * j as f64 / n as f64);
        let q = p.sub_constant(w);
        out.extend(aberth_roots(&q, DEFAULT_TOL, DEFAULT_MAX_ITER)?.roots.0);
    }
    Ok(RootSet::new(out))
}

/// Prefix averages `(1/n) Σ_{i≤n} log₊|a_i|`.
pub fn log_cesaro_profile(atoms: &[Complex]) -> Vec<f64> {
    let mut sum = 0.0;
    atoms
        .iter()
        .enumerate()
        .map(|(i, z)| {
            sum += z.norm().ln().max(0.0);
            sum / (i + 1) as f64
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SequenceKind {
    BitReversedCircle,
    LowDiscrepancyDisk,
    Dyadic,
    File,
}

fn one() -> f64 {
    1.0
}

/// A deterministic base sequence, scaled by `scale` and rotated by
/// `rotation` radians.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BaseSequence {
    pub sequence: SequenceKind,
    #[serde(default = "one")]
    pub scale: f64,
    #[serde(default)]
    pub rotation: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<PathBuf>,
}

impl BaseSequence {
    pub fn new(sequence: SequenceKind) -> Self {
        BaseSequence {
            sequence,
            scale: 1.0,
            rotation: 0.0,
            path: None,
        }
    }

    pub fn scaled(mut self, scale: f64) -> Self {
        self.scale = scale;
        self
    }

    pub fn rotated(mut self, rotation: f64) -> Self {
        self.rotation = rotation;
        self
    }

    fn validate(&self) -> Result<()> {
        if !(self.scale > 0.0 && self.scale.is_finite() && self.rotation.is_finite()) {
            return Err(Error::InvalidSpec(
                "base sequence needs a positive scale and finite rotation".into(),
            ));
        }
        if (self.sequence == SequenceKind::File) != self.path.is_some() {
            return Err(Error::InvalidSpec(
                "`path` is required for file sequences and only for them".into(),
            ));
        }
        Ok(())
    }

    /// First `n` terms.
    pub fn terms(&self, n: usize) -> Result<RootSet> {
        self.validate()?;
        let raw = match self.sequence {
            SequenceKind::BitReversedCircle => bit_reversed_circle(n),
            SequenceKind::LowDiscrepancyDisk => low_discrepancy_disk(n),
            SequenceKind::Dyadic => dyadic_sequence(n),
            SequenceKind::File => {
                let path = self.path.as_ref().expect("validated");
                let file = atoms::read_atoms(path)?;
                if file.atoms.len() < n {
                    return Err(Error::InvalidSpec(format!(
                        "{} holds {} atoms, {n} requested",
                        path.display(),
                        file.atoms.len()
                    )));
                }
                file.atoms.into_iter().take(n).collect()
            }
        };
        if self.scale == 1.0 && self.rotation == 0.0 {
            return Ok(raw);
        }
        let m = Complex::from_polar(self.scale, self.rotation);
        Ok(raw.iter().map(|z| z * m).collect())
    }
}

/// Sampling laws on ℂ.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Law {
    UniformDisk,
    UniformCircle,
    /// `(N₁ + iN₂)/√2`, so `E|X|² = 1`.
    ComplexGaussian,
    /// Standard Cauchy on the real axis.
    Cauchy,
    /// Real `Exp(1)`.
    Exponential,
    /// The constant 1.
    Unit,
}

impl Law {
    pub fn sample<R: Rng + ?Sized>(self, rng: &mut R) -> Complex {
        match self {
            Law::UniformDisk => {
                let r = rng.random::<f64>().sqrt();
                Complex::from_polar(r, TAU * rng.random::<f64>())
            }
            Law::UniformCircle => Complex::from_polar(1.0, TAU * rng.random::<f64>()),
            Law::ComplexGaussian => {
                let re: f64 = rng.sample(StandardNormal);
                let im: f64 = rng.sample(StandardNormal);
                Complex::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
            }
            Law::Cauchy => Complex::new(standard_cauchy(rng), 0.0),
            Law::Exponential => Complex::new(rng.sample(Exp1), 0.0),
            Law::Unit => Complex::new(1.0, 0.0),
        }
    }

    pub fn has_finite_mean(self) -> bool {
        self != Law::Cauchy
    }

    fn symmetric(self) -> bool {
        !matches!(self, Law::Exponential | Law::Unit)
    }
}

/// Inverse-CDF draw `tan(π(U - 1/2))`.
pub fn standard_cauchy<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    (PI * (rng.random::<f64>() - 0.5)).tan()
}

/// `σ_k = scale · k^{-exponent}` for `k ≥ 1`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SigmaSchedule {
    #[serde(default = "one")]
    pub scale: f64,
    #[serde(default = "half")]
    pub exponent: f64,
}

fn half() -> f64 {
    0.5
}

impl Default for SigmaSchedule {
    fn default() -> Self {
        SigmaSchedule {
            scale: 1.0,
            exponent: 0.5,
        }
    }
}

impl SigmaSchedule {
    pub fn sigma(&self, k: usize) -> f64 {
        self.scale * (k as f64).powf(-self.exponent)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    /// `z^n - 1`.
    RootsOfUnity,
    /// First `n` terms of [`dyadic_sequence`].
    Dyadic,
    /// `Π_j (z^n - a_j^n)`, `k·n` zeros; needs `radii`.
    Example1,
    /// `P^n - 1`, `n·deg P` zeros; needs `poly_roots` (the zeros of `P`).
    Lemniscate,
    /// `(z^{n+1} - 1)/(z - 1)`: the `(n+1)`-th roots of unity except 1.
    RemovedRoot,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EnsembleSpec {
    /// `ξ_k = a_k` or `b_k` with probability 1/2 each. When `b` is omitted it
    /// is `a` rotated by the golden angle.
    PairwiseChoice {
        a: BaseSequence,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        b: Option<BaseSequence>,
    },
    /// Row `n` chooses between the `n`-th roots of unity and the same roots
    /// rotated by `offset·π/n`, independently per entry.
    TriangularPairwise {
        #[serde(default = "one")]
        offset: f64,
    },
    Iid {
        law: Law,
    },
    /// `u_k + σ_k X_k`.
    Perturbation {
        base: BaseSequence,
        #[serde(default = "gaussian")]
        law: Law,
        #[serde(default)]
        sigma: SigmaSchedule,
    },
    /// Keeps each base term with probability `p` until `n` are kept.
    BernoulliThinning {
        base: BaseSequence,
        p: f64,
    },
    /// First `n + 1` base terms with one uniformly chosen term removed.
    RandomDeletion {
        base: BaseSequence,
    },
    Deterministic {
        family: Family,
        #[serde(default, skip_serializing_if = "Vec::is_empty")]
        radii: Vec<f64>,
        #[serde(default, skip_serializing_if = "Vec::is_empty")]
        poly_roots: Vec<Complex>,
    },
    /// `2n` zeros `X_k ± i` with `X_k` standard Cauchy.
    CauchyPairs,
    /// `Σ a_k/(z - z_k)` with i.i.d. weights and deterministic poles.
    GeneralizedDerivative {
        weights: Law,
        poles: BaseSequence,
    },
}

fn gaussian() -> Law {
    Law::ComplexGaussian
}

/// Output of [`generate`].
#[derive(Clone, Debug, PartialEq)]
pub enum Generated {
    Zeros(RootSet),
    Rational(RationalSum),
}

impl Generated {
    pub fn zeros(&self) -> Option<&RootSet> {
        match self {
            Generated::Zeros(z) => Some(z),
            Generated::Rational(_) => None,
        }
    }

    /// `L = P'/P` for zeros, or the generated rational sum.
    pub fn to_rational(&self) -> RationalSum {
        match self {
            Generated::Zeros(z) => RationalSum::classical(z),
            Generated::Rational(l) => l.clone(),
        }
    }

    /// Atoms of `𝓜(P)`, or the poles of a rational sum.
    pub fn atoms(&self) -> &[Complex] {
        match self {
            Generated::Zeros(z) => z,
            Generated::Rational(l) => l.poles(),
        }
    }
}

impl EnsembleSpec {
    /// Parses a spec from TOML, either bare or under an `[ensemble]` table.
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let value: toml::Table = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        let table = match value.get("ensemble") {
            Some(toml::Value::Table(t)) => t.clone(),
            _ => value,
        };
        let spec: EnsembleSpec = table.try_into().map_err(|e: toml::de::Error| Error::Config(e.to_string()))?;
        spec.validate()?;
        Ok(spec)
    }

    /// The golden-angle paired circle ensemble.
    pub fn pairwise_circle() -> Self {
        EnsembleSpec::PairwiseChoice {
            a: BaseSequence::new(SequenceKind::BitReversedCircle),
            b: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidSpec(m.into()));
        match self {
            EnsembleSpec::PairwiseChoice { a, b } => {
                a.validate()?;
                if let Some(b) = b {
                    b.validate()?;
                }
            }
            EnsembleSpec::TriangularPairwise { offset } => {
                if !(offset.is_finite() && *offset > 0.0 && *offset < 2.0) {
                    return bad("triangular offset must lie in (0, 2)");
                }
            }
            EnsembleSpec::Iid { .. } | EnsembleSpec::CauchyPairs => {}
            EnsembleSpec::Perturbation { base, law, sigma } => {
                base.validate()?;
                if !law.symmetric() || !law.has_finite_mean() {
                    return bad("perturbation law must be symmetric with E|X| finite");
                }
                if !(sigma.scale > 0.0 && sigma.scale.is_finite()) {
                    return bad("sigma scale must be positive");
                }
                if !(sigma.exponent > 0.0 && sigma.exponent.is_finite()) {
                    return bad("sigma must decrease to 0 (exponent > 0)");
                }
            }
            EnsembleSpec::BernoulliThinning { base, p } => {
                base.validate()?;
                if !(*p > 0.0 && *p < 1.0) {
                    return bad("thinning probability must satisfy 0 < p < 1");
                }
            }
            EnsembleSpec::RandomDeletion { base } => base.validate()?,
            EnsembleSpec::Deterministic {
                family,
                radii,
                poly_roots,
            } => match family {
                Family::Example1 => {
                    example1_roots(radii, 1)?;
                }
                Family::Lemniscate => {
                    if poly_roots.is_empty() || poly_roots.iter().any(|z| !z.is_finite()) {
                        return bad("lemniscate needs the finite zeros of P in `poly_roots`");
                    }
                }
                _ => {
                    if !radii.is_empty() || !poly_roots.is_empty() {
                        return bad("`radii`/`poly_roots` only apply to example1/lemniscate");
                    }
                }
            },
            EnsembleSpec::GeneralizedDerivative { weights, poles } => {
                poles.validate()?;
                if !weights.has_finite_mean() {
                    return bad("weight law must have a finite first absolute moment");
                }
            }
        }
        Ok(())
    }

    /// Whether `generate(n)` is a prefix of `generate(m)` for `n < m`.
    pub fn is_sequence_kind(&self) -> bool {
        !matches!(
            self,
            EnsembleSpec::TriangularPairwise { .. }
                | EnsembleSpec::RandomDeletion { .. }
                | EnsembleSpec::Deterministic { .. }
        )
    }

    /// Stand-in for the limiting measure: `size` atoms (approximately, for
    /// families whose atom count is a multiple of a block size).
    pub fn reference(&self, size: usize, seed: Seed) -> Result<RootSet> {
        self.validate()?;
        let size = size.max(1);
        match self {
            EnsembleSpec::PairwiseChoice { a, .. } => a.terms(size),
            EnsembleSpec::Perturbation { base, .. }
            | EnsembleSpec::BernoulliThinning { base, .. }
            | EnsembleSpec::RandomDeletion { base } => base.terms(size),
            EnsembleSpec::GeneralizedDerivative { poles, .. } => poles.terms(size),
            EnsembleSpec::TriangularPairwise { .. } => Ok(bit_reversed_circle(size)),
            EnsembleSpec::Iid { law } => {
                let mut rng = seed.derive(u64::MAX).rng();
                Ok((0..size).map(|_| law.sample(&mut rng)).collect())
            }
            EnsembleSpec::CauchyPairs => {
                let mut rng = seed.derive(u64::MAX).rng();
                let i = Complex::new(0.0, 1.0);
                Ok((0..size.div_ceil(2))
                    .flat_map(|_| {
                        let x = Complex::new(standard_cauchy(&mut rng), 0.0);
                        [x + i, x - i]
                    })
                    .collect())
            }
            EnsembleSpec::Deterministic {
                family,
                radii,
                poly_roots,
            } => match family {
                Family::RootsOfUnity | Family::Dyadic | Family::RemovedRoot => {
                    Ok(bit_reversed_circle(size))
                }
                Family::Example1 => {
                    let per = size.div_ceil(radii.len());
                    Ok(radii
                        .iter()
                        .flat_map(|&a| bit_reversed_circle(per).0.into_iter().map(move |z| z * a))
                        .collect())
                }
                Family::Lemniscate => lemniscate_roots(
                    &poly_from_roots(&RootSet::new(poly_roots.clone())),
                    size.div_ceil(poly_roots.len()),
                ),
            },
        }
    }
}

/// One draw of the ensemble at size `n`.
///
/// Most kinds return `n` zeros; `Example1` returns `k·n`, `Lemniscate`
/// `n·deg P`, and `CauchyPairs` `2n`.
pub fn generate(spec: &EnsembleSpec, n: usize, seed: Seed) -> Result<Generated> {
    spec.validate()?;
    if n == 0 {
        return Err(Error::InvalidSpec("n must be at least 1".into()));
    }
    let mut rng = seed.rng();
    let zeros: RootSet = match spec {
        EnsembleSpec::PairwiseChoice { a, b } => {
            let ta = a.terms(n)?;
            let tb = match b {
                Some(b) => b.terms(n)?,
                None => a.clone().rotated(a.rotation + GOLDEN_ANGLE).terms(n)?,
            };
            ta.iter()
                .zip(tb.iter())
                .map(|(&x, &y)| if rng.random::<bool>() { x } else { y })
                .collect()
        }
        EnsembleSpec::TriangularPairwise { offset } => {
            let mut row = seed.derive(n as u64).rng();
            let rot = Complex::from_polar(1.0, offset * PI / n as f64);
            (0..n)
                .map(|i| {
                    let a = Complex::from_polar(1.0, TAU * i as f64 / n as f64);
                    if row.random::<bool>() {
                        a
                    } else {
                        a * rot
                    }
                })
                .collect()
        }
        EnsembleSpec::Iid { law } => (0..n).map(|_| law.sample(&mut rng)).collect(),
        EnsembleSpec::Perturbation { base, law, sigma } => base
            .terms(n)?
            .iter()
            .enumerate()
            .map(|(k, &u)| u + law.sample(&mut rng) * sigma.sigma(k + 1))
            .collect(),
        EnsembleSpec::BernoulliThinning { base, p } => {
            // consume the base in chunks until n terms are kept
            let mut kept = Vec::with_capacity(n);
            let mut len = ((n as f64 / p) * 1.25) as usize + 16;
            let mut consumed = 0;
            while kept.len() < n {
                let terms = base.terms(len)?;
                for &z in &terms[consumed..] {
                    if rng.random_bool(*p) {
                        kept.push(z);
                        if kept.len() == n {
                            break;
                        }
                    }
                }
                consumed = len;
                len *= 2;
            }
            RootSet::new(kept)
        }
        EnsembleSpec::RandomDeletion { base } => {
            let mut terms = base.terms(n + 1)?;
            let drop = rng.random_range(0..=n);
            terms.remove(drop);
            terms
        }
        EnsembleSpec::Deterministic {
            family,
            radii,
            poly_roots,
        } => match family {
            Family::RootsOfUnity => (0..n)
                .map(|k| Complex::from_polar(1.0, TAU * k as f64 / n as f64))
                .collect(),
            Family::Dyadic => dyadic_sequence(n),
            Family::Example1 => example1_roots(radii, n)?,
            Family::Lemniscate => {
                lemniscate_roots(&poly_from_roots(&RootSet::new(poly_roots.clone())), n)?
            }
            Family::RemovedRoot => (1..=n)
                .map(|k| Complex::from_polar(1.0, TAU * k as f64 / (n + 1) as f64))
                .collect(),
        },
        EnsembleSpec::CauchyPairs => {
            let i = Complex::new(0.0, 1.0);
            (0..n)
                .flat_map(|_| {
                    let x = Complex::new(standard_cauchy(&mut rng), 0.0);
                    [x + i, x - i]
                })
                .collect()
        }
        EnsembleSpec::GeneralizedDerivative { weights, poles } => {
            let poles = poles.terms(n)?;
            let w = (0..n).map(|_| weights.sample(&mut rng)).collect();
            return Ok(Generated::Rational(RationalSum::new(w, poles.0)?));
        }
    };
    Ok(Generated::Zeros(zeros))
}

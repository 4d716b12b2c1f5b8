//! JSON encodings of the library types for file artifacts and the CLI.
//!
//! Conventions: field elements are two-integer arrays [a, b] meaning
//! a + b*omega, or {"num": [a, b], "den": d} when fractional; rationals are
//! strings "p/q" in lowest terms; matrices are row-major entry arrays.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::eigen::{EigenReport, EisensteinCertificate};
use crate::error::{Error, Result};
use crate::field::{KElem, QuadField};
use crate::fourier::{CuspReport, FourierExpansion, HermIndex};
use crate::hecke::{DoubleCosetKey, HeckeElement, RightCosetSet};
use crate::ideal::ClassRepSet;
use crate::matrix::MatK;

fn int_to_i64(x: &BigInt) -> Result<i64> {
    x.to_i64()
        .ok_or_else(|| Error::Domain("integer too large for the JSON encoding".into()))
}

pub fn rational_to_string(r: &BigRational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

pub fn rational_from_string(s: &str) -> Result<BigRational> {
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => (n, d),
        None => (s, "1"),
    };
    let num: BigInt = num
        .trim()
        .parse()
        .map_err(|_| Error::Domain(format!("bad rational {s}")))?;
    let den: BigInt = den
        .trim()
        .parse()
        .map_err(|_| Error::Domain(format!("bad rational {s}")))?;
    if den.is_zero() {
        return Err(Error::Domain(format!("zero denominator in {s}")));
    }
    Ok(BigRational::new(num, den))
}

/// A field element: [a, b] when integral, {"num": [a,b], "den": d} otherwise.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ElemJson {
    Integral([i64; 2]),
    Fraction { num: [i64; 2], den: i64 },
}

impl ElemJson {
    pub fn encode(e: &KElem) -> Result<Self> {
        let a = int_to_i64(e.coord_a())?;
        let b = int_to_i64(e.coord_b())?;
        if e.is_integral() {
            Ok(ElemJson::Integral([a, b]))
        } else {
            Ok(ElemJson::Fraction {
                num: [a, b],
                den: int_to_i64(e.denom())?,
            })
        }
    }

    pub fn decode(&self, field: QuadField) -> Result<KElem> {
        match self {
            ElemJson::Integral([a, b]) => Ok(KElem::from_coords(field, *a, *b)),
            ElemJson::Fraction { num: [a, b], den } => KElem::new_frac(
                field,
                BigInt::from(*a),
                BigInt::from(*b),
                BigInt::from(*den),
            ),
        }
    }
}

/// Matrix format: {"n": degree, "q": similitude, "entries": [[[a,b], ...]]}.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MatrixJson {
    pub n: usize,
    pub q: i64,
    pub entries: Vec<Vec<[i64; 2]>>,
}

impl MatrixJson {
    pub fn encode(m: &MatK) -> Result<Self> {
        let q = m
            .similitude_factor()?
            .ok_or(Error::NotSimilitude)?;
        let mut entries = Vec::with_capacity(m.rows());
        for i in 0..m.rows() {
            let mut row = Vec::with_capacity(m.cols());
            for j in 0..m.cols() {
                let e = m.at(i, j);
                if !e.is_integral() {
                    return Err(Error::NotIntegral);
                }
                row.push([int_to_i64(e.coord_a())?, int_to_i64(e.coord_b())?]);
            }
            entries.push(row);
        }
        Ok(MatrixJson {
            n: m.rows() / 2,
            q: int_to_i64(&q)?,
            entries,
        })
    }

    pub fn decode(&self, field: QuadField) -> Result<MatK> {
        let dim = 2 * self.n;
        if self.entries.len() != dim || self.entries.iter().any(|r| r.len() != dim) {
            return Err(Error::Dimension("matrix entry grid has the wrong shape".into()));
        }
        let mut data = Vec::with_capacity(dim * dim);
        for row in &self.entries {
            for &[a, b] in row {
                data.push(KElem::from_coords(field, a, b));
            }
        }
        let m = MatK::from_entries(field, dim, dim, data)?;
        match m.similitude_factor()? {
            Some(q) if int_to_i64(&q)? == self.q => Ok(m),
            _ => Err(Error::Consistency(
                "matrix similitude does not match the declared q".into(),
            )),
        }
    }
}

/// Coset-set artifact: {"m": ..., "key": [...], "q": ..., "reps": [...]}.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CosetSetJson {
    pub m: u64,
    pub key: Vec<i64>,
    pub q: i64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub reps: Vec<MatrixJson>,
}

impl CosetSetJson {
    pub fn encode(set: &RightCosetSet, seed: Option<u64>) -> Result<Self> {
        Ok(CosetSetJson {
            m: set.field.m(),
            key: set
                .key
                .divisors()
                .iter()
                .map(int_to_i64)
                .collect::<Result<_>>()?,
            q: int_to_i64(&set.key.q())?,
            seed,
            reps: set
                .reps
                .iter()
                .map(MatrixJson::encode)
                .collect::<Result<_>>()?,
        })
    }

    pub fn decode(&self) -> Result<RightCosetSet> {
        let field = QuadField::new(self.m)?;
        let n = self.key.len() / 2;
        let key = DoubleCosetKey::from_ints(n, &self.key)?;
        let reps = self
            .reps
            .iter()
            .map(|m| {
                let mat = m.decode(field)?;
                let (_, _, c, _) = mat.blocks()?;
                if !c.is_zero() {
                    return Err(Error::NotTriangular);
                }
                Ok(mat)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(RightCosetSet { field, key, reps })
    }
}

/// Hecke-element artifact with rational coefficients per key.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HeckeElementJson {
    pub m: u64,
    pub n: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub terms: Vec<HeckeTermJson>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HeckeTermJson {
    pub key: Vec<i64>,
    pub coeff: String,
}

impl HeckeElementJson {
    pub fn encode(e: &HeckeElement, seed: Option<u64>) -> Result<Self> {
        let terms = e
            .terms()
            .iter()
            .map(|(k, c)| {
                Ok(HeckeTermJson {
                    key: k.divisors().iter().map(int_to_i64).collect::<Result<_>>()?,
                    coeff: rational_to_string(c),
                })
            })
            .collect::<Result<_>>()?;
        Ok(HeckeElementJson {
            m: e.field().m(),
            n: e.degree(),
            seed,
            terms,
        })
    }

    pub fn decode(&self) -> Result<HeckeElement> {
        let field = QuadField::new(self.m)?;
        let mut e = HeckeElement::zero(field, self.n);
        for t in &self.terms {
            let key = DoubleCosetKey::from_ints(self.n, &t.key)?;
            key.ensure_inert(field)?;
            e.add_term(key, rational_from_string(&t.coeff)?);
        }
        Ok(e)
    }
}

/// Fourier-expansion artifact. Only finalized expansions (scale 1) are
/// written; `trunc` is the certified integer bound and `upper` holds the
/// numerators of the off-diagonal entries against sqrt(d_K).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExpansionJson {
    pub m: u64,
    pub n: usize,
    pub k: i64,
    pub scale: i64,
    pub trunc: i64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub coeffs: Vec<CoeffJson>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CoeffJson {
    #[serde(rename = "T")]
    pub t: IndexJson,
    pub c: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IndexJson {
    pub diag: Vec<i64>,
    pub upper: Vec<[i64; 2]>,
}

impl ExpansionJson {
    pub fn encode(f: &FourierExpansion, seed: Option<u64>) -> Result<Self> {
        if !f.scale.is_one() {
            return Err(Error::Domain(
                "only expansions on the integral index lattice are encoded".into(),
            ));
        }
        let sqrt_d = f.field.sqrt_disc();
        let mut coeffs = Vec::with_capacity(f.coeffs().len());
        for (t, c) in f.coeffs() {
            let diag = t
                .diag()
                .iter()
                .map(|x| {
                    if !x.is_integer() {
                        return Err(Error::Domain("non-integral diagonal".into()));
                    }
                    int_to_i64(&x.to_integer())
                })
                .collect::<Result<_>>()?;
            let upper = t
                .upper()
                .iter()
                .map(|e| {
                    let mu = e * &sqrt_d;
                    if !mu.is_integral() {
                        return Err(Error::Domain("index outside the integral lattice".into()));
                    }
                    Ok([int_to_i64(mu.coord_a())?, int_to_i64(mu.coord_b())?])
                })
                .collect::<Result<_>>()?;
            coeffs.push(CoeffJson {
                t: IndexJson { diag, upper },
                c: rational_to_string(c),
            });
        }
        let trunc = f.trunc.to_integer();
        Ok(ExpansionJson {
            m: f.field.m(),
            n: f.n,
            k: f.weight,
            scale: 1,
            trunc: int_to_i64(&trunc)?,
            seed,
            coeffs,
        })
    }

    pub fn decode(&self) -> Result<FourierExpansion> {
        let field = QuadField::new(self.m)?;
        if self.scale != 1 {
            return Err(Error::Domain("only scale-1 expansions are accepted".into()));
        }
        let sqrt_d = field.sqrt_disc();
        let mut f = FourierExpansion::new(
            field,
            self.n,
            self.k,
            BigRational::from(BigInt::from(self.trunc)),
        );
        for entry in &self.coeffs {
            if entry.t.diag.len() != self.n {
                return Err(Error::Dimension("index diagonal length mismatch".into()));
            }
            let diag = entry
                .t
                .diag
                .iter()
                .map(|&x| BigRational::from(BigInt::from(x)))
                .collect();
            let upper = entry
                .t
                .upper
                .iter()
                .map(|&[a, b]| KElem::from_coords(field, a, b).checked_div(&sqrt_d))
                .collect::<Result<_>>()?;
            let index = HermIndex::new(field, diag, upper)?;
            f.insert(index, rational_from_string(&entry.c)?)?;
        }
        Ok(f)
    }
}

/// Class-group artifact: {"h": ..., "forms": [[a, b, c], ...],
/// "reps": [...], "N": ...}.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ClassGroupJson {
    pub h: usize,
    pub forms: Vec<[i64; 3]>,
    pub reps: Vec<ElemJson>,
    #[serde(rename = "N")]
    pub n_clearing: i64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub avoided_prime: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

impl ClassGroupJson {
    pub fn encode(set: &ClassRepSet, seed: Option<u64>) -> Result<Self> {
        Ok(ClassGroupJson {
            h: set.class_number(),
            forms: set
                .reps
                .iter()
                .map(|r| [r.form.alpha, r.form.beta, r.form.gamma])
                .collect(),
            reps: set
                .reps
                .iter()
                .map(|r| ElemJson::encode(&r.u))
                .collect::<Result<_>>()?,
            n_clearing: int_to_i64(&set.common_denominator)?,
            avoided_prime: set.avoided_prime,
            seed,
        })
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HypothesisJson {
    pub name: String,
    pub pass: bool,
    pub witness: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CertificateJson {
    pub hypotheses: Vec<HypothesisJson>,
    pub conclusion: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

impl CertificateJson {
    pub fn encode(cert: &EisensteinCertificate, seed: Option<u64>) -> Self {
        CertificateJson {
            hypotheses: cert
                .hypotheses
                .iter()
                .map(|h| HypothesisJson {
                    name: h.name.clone(),
                    pass: h.pass,
                    witness: h.witness.clone(),
                })
                .collect(),
            conclusion: cert.conclusion,
            seed,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EigenReportJson {
    pub lambda: Option<String>,
    pub consistent: bool,
    pub checked_indices: usize,
    pub certified_bound: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

impl EigenReportJson {
    pub fn encode(r: &EigenReport, seed: Option<u64>) -> Self {
        EigenReportJson {
            lambda: r.lambda.as_ref().map(rational_to_string),
            consistent: r.is_consistent(),
            checked_indices: r.checked_indices,
            certified_bound: rational_to_string(&r.certified_bound),
            seed,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CuspReportJson {
    pub direct: bool,
    pub twisted: bool,
    pub per_class: Vec<bool>,
    pub agree: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

impl CuspReportJson {
    pub fn encode(r: &CuspReport, seed: Option<u64>) -> Self {
        CuspReportJson {
            direct: r.direct,
            twisted: r.twisted,
            per_class: r.per_class.clone(),
            agree: r.agree(),
            seed,
        }
    }
}

/// Machine-readable error report written to stderr by the CLI.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ErrorJson {
    pub error: String,
    pub message: String,
}

impl ErrorJson {
    pub fn from_error(e: &Error) -> Self {
        ErrorJson {
            error: e.code().to_string(),
            message: e.to_string(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fourier::eisenstein_q_expansion;
    use crate::hecke::{enumerate_right_cosets, DoubleCosetKey, DEFAULT_ENUM_CAP};

    #[test]
    fn rational_strings() {
        let r = BigRational::new(BigInt::from(-28), BigInt::from(27));
        assert_eq!(rational_to_string(&r), "-28/27");
        assert_eq!(rational_from_string("-28/27").unwrap(), r);
        assert_eq!(
            rational_from_string("5").unwrap(),
            BigRational::from(BigInt::from(5))
        );
        assert!(rational_from_string("1/0").is_err());
    }

    #[test]
    fn coset_set_round_trip() {
        let field = QuadField::new(1).unwrap();
        let set =
            enumerate_right_cosets(field, &DoubleCosetKey::generator_p(1, 3), DEFAULT_ENUM_CAP)
                .unwrap();
        let encoded = CosetSetJson::encode(&set, Some(7)).unwrap();
        let text = serde_json::to_string(&encoded).unwrap();
        let parsed: CosetSetJson = serde_json::from_str(&text).unwrap();
        let decoded = parsed.decode().unwrap();
        assert_eq!(decoded.key, set.key);
        assert_eq!(decoded.reps.len(), set.reps.len());
        for (a, b) in decoded.reps.iter().zip(&set.reps) {
            assert_eq!(a, b);
        }
    }

    #[test]
    fn expansion_round_trip() {
        let field = QuadField::new(11).unwrap();
        let f = eisenstein_q_expansion(field, 4, 8).unwrap();
        let encoded = ExpansionJson::encode(&f, None).unwrap();
        let text = serde_json::to_string(&encoded).unwrap();
        let parsed: ExpansionJson = serde_json::from_str(&text).unwrap();
        let decoded = parsed.decode().unwrap();
        assert_eq!(decoded.coeffs(), f.coeffs());
        assert_eq!(decoded.trunc, f.trunc);
        assert_eq!(decoded.weight, f.weight);
    }

    #[test]
    fn element_encoding_shapes() {
        let field = QuadField::new(5).unwrap();
        let e = KElem::from_coords(field, 3, -2);
        let j = serde_json::to_string(&ElemJson::encode(&e).unwrap()).unwrap();
        assert_eq!(j, "[3,-2]");
        let frac = KElem::new_frac(field, BigInt::from(1), BigInt::from(1), BigInt::from(2)).unwrap();
        let j = serde_json::to_string(&ElemJson::encode(&frac).unwrap()).unwrap();
        assert_eq!(j, r#"{"num":[1,1],"den":2}"#);
        let back: ElemJson = serde_json::from_str(&j).unwrap();
        assert_eq!(back.decode(field).unwrap(), frac);
    }
}

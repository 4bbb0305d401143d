//! Numeric evaluation at a fixed dimension with pseudo-random components.
//!
//! Used as an independent check of the symbolic transformations: two
//! expressions that are symbolically equal must evaluate to the same number
//! for every assignment of component values and free indices.
//!
//! Components are deterministic functions of `(seed, name, indices)`,
//! projected onto the declared symmetries of each tensor and onto
//! permutations of commuting partial derivatives. Conventions:
//!
//! * base components are all-lower; a contravariant slot is the base
//!   component raised by the inverse metric, `X([c],[u]) = g^{ux} X_{xc}`,
//!   regardless of derivative slots;
//! * the metric is `2 I + small symmetric noise`, its derivatives are
//!   independent symmetric jets, and the inverse metric's derivatives follow
//!   from those;
//! * `kdelta` is the identity, `dim` is `D`, `ichr2` is computed from the
//!   metric jets.

use std::cell::RefCell;
use std::collections::{BTreeMap, HashMap};

use nalgebra::DMatrix;
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};

use crate::context::Context;
use crate::error::{Error, Result};
use crate::expr::{DerivKind, Expression, Factor, IndexName, Indexed, Term, DIM, ICHR2, KDELTA};
use crate::symmetry::indexed_variants;

/// An explicit value for one all-lower component.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComponentOverride {
    pub name: String,
    /// Number of tensor (non-derivative) slots.
    pub rank: usize,
    /// Tensor slots followed by derivative slots.
    pub indices: Vec<usize>,
    pub value: f64,
}

/// Numeric environment: dimension, seed, metric name and explicit values.
/// Serializable so that fixtures can be stored as JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComponentAssignment {
    pub dim: usize,
    pub seed: u64,
    #[serde(default)]
    pub metric: Option<String>,
    /// Values replacing the generated ones.
    #[serde(default)]
    pub overrides: Vec<ComponentOverride>,
    /// Offsets added to generated (or overridden) values, used for
    /// finite-difference checks.
    #[serde(default)]
    pub perturbations: Vec<ComponentOverride>,
}

impl ComponentAssignment {
    pub fn new(dim: usize, seed: u64) -> Self {
        ComponentAssignment {
            dim,
            seed,
            metric: None,
            overrides: Vec::new(),
            perturbations: Vec::new(),
        }
    }

    pub fn with_metric(mut self, name: &str) -> Self {
        self.metric = Some(name.to_string());
        self
    }

    pub fn perturbed(mut self, name: &str, rank: usize, indices: Vec<usize>, delta: f64) -> Self {
        self.perturbations.push(ComponentOverride {
            name: name.to_string(),
            rank,
            indices,
            value: delta,
        });
        self
    }
}

fn mix(mut x: u64) -> u64 {
    // splitmix64 finalizer
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

fn raw_value(seed: u64, name: &str, rank: usize, idx: &[usize]) -> f64 {
    let mut h = mix(seed);
    for b in name.bytes() {
        h = mix(h ^ u64::from(b));
    }
    h = mix(h ^ (rank as u64) << 32);
    for &i in idx {
        h = mix(h ^ (i as u64 + 1));
    }
    (h >> 11) as f64 / (1u64 << 53) as f64 * 2.0 - 1.0
}

/// Cache key: name, tensor rank, all-lower component indices.
type ComponentKey = (String, usize, Vec<usize>);

/// Evaluates expressions numerically under one [`ComponentAssignment`].
pub struct Evaluator<'a> {
    assign: &'a ComponentAssignment,
    ctx: &'a Context,
    metric: Option<String>,
    g: DMatrix<f64>,
    ginv: DMatrix<f64>,
    cache: RefCell<HashMap<ComponentKey, f64>>,
}

impl<'a> Evaluator<'a> {
    pub fn new(assign: &'a ComponentAssignment, ctx: &'a Context) -> Result<Self> {
        let d = assign.dim;
        let metric = assign.metric.clone().or_else(|| ctx.metric.name.clone());
        let mut ev = Evaluator {
            assign,
            ctx,
            metric,
            g: DMatrix::identity(d, d),
            ginv: DMatrix::identity(d, d),
            cache: RefCell::new(HashMap::new()),
        };
        if let Some(m) = ev.metric.clone() {
            ev.g = DMatrix::from_fn(d, d, |i, j| ev.lower_component(&m, 2, &[i, j]));
            ev.ginv =
                ev.g.clone()
                    .try_inverse()
                    .ok_or_else(|| Error::Unsupported("singular metric".into()))?;
        }
        Ok(ev)
    }

    fn is_metric(&self, name: &str) -> bool {
        self.metric.as_deref() == Some(name)
    }

    /// All-lower component: `rank` tensor slots then derivative slots.
    fn lower_component(&self, name: &str, rank: usize, idx: &[usize]) -> f64 {
        let key = (name.to_string(), rank, idx.to_vec());
        if let Some(v) = self.cache.borrow().get(&key) {
            return *v;
        }
        let labels: Vec<String> = idx.iter().map(|i| i.to_string()).collect();
        let shape = Indexed::new(name, labels[..rank].iter().map(String::as_str), Vec::<&str>::new())
            .with_derivs(labels[rank..].iter().map(String::as_str));
        let mut table = self.ctx.symmetries.clone();
        if self.is_metric(name) {
            let _ = table.declare(crate::symmetry::SymmetryDeclaration::symmetric(name, 2, 0));
        }
        let variants = indexed_variants(&shape, &table);
        let n = variants.len() as f64;
        let mut v = 0.0;
        for (var, sign) in variants {
            let ix: Vec<usize> = var
                .cov
                .iter()
                .chain(var.derivs.iter().map(|d| &d.index))
                .map(|l| l.as_str().parse().expect("numeric label"))
                .collect();
            v += f64::from(sign) * self.generated(name, rank, &ix);
        }
        v /= n;
        if self.is_metric(name) && idx.len() == 2 {
            v = 0.1 * v + if idx[0] == idx[1] { 2.0 } else { 0.0 };
        }
        for p in &self.assign.perturbations {
            if p.name == name && p.rank == rank && p.indices == idx {
                v += p.value;
            }
        }
        self.cache.borrow_mut().insert(key, v);
        v
    }

    fn generated(&self, name: &str, rank: usize, idx: &[usize]) -> f64 {
        self.assign
            .overrides
            .iter()
            .find(|o| o.name == name && o.rank == rank && o.indices == idx)
            .map(|o| o.value)
            .unwrap_or_else(|| raw_value(self.assign.seed, name, rank, idx))
    }

    /// `g_{ab, derivs}`.
    fn metric_jet(&self, a: usize, b: usize, derivs: &[usize]) -> f64 {
        let m = self.metric.as_deref().expect("metric");
        let mut idx = vec![a, b];
        idx.extend_from_slice(derivs);
        self.lower_component(m, 2, &idx)
    }

    /// `g^{ab}_{,derivs}` for up to two derivatives.
    fn inverse_jet(&self, a: usize, b: usize, derivs: &[usize]) -> Result<f64> {
        let d = self.assign.dim;
        let gi = &self.ginv;
        match derivs {
            [] => Ok(gi[(a, b)]),
            [c] => {
                let mut s = 0.0;
                for x in 0..d {
                    for y in 0..d {
                        s -= gi[(a, x)] * gi[(b, y)] * self.metric_jet(x, y, &[*c]);
                    }
                }
                Ok(s)
            }
            [c, e] => {
                // d_e(-g^{ax} g^{by} g_{xy,c})
                let mut s = 0.0;
                for x in 0..d {
                    for y in 0..d {
                        let gxy_c = self.metric_jet(x, y, &[*c]);
                        s -= self.inverse_jet(a, x, &[*e])? * gi[(b, y)] * gxy_c;
                        s -= gi[(a, x)] * self.inverse_jet(b, y, &[*e])? * gxy_c;
                        s -= gi[(a, x)] * gi[(b, y)] * self.metric_jet(x, y, &[*c, *e]);
                    }
                }
                Ok(s)
            }
            _ => Err(Error::Unsupported("third derivative of the inverse metric".into())),
        }
    }

    fn christoffel(&self, i: usize, j: usize, k: usize) -> f64 {
        let d = self.assign.dim;
        (0..d)
            .map(|s| {
                0.5 * self.ginv[(k, s)]
                    * (self.metric_jet(i, s, &[j]) + self.metric_jet(j, s, &[i]) - self.metric_jet(i, j, &[s]))
            })
            .sum()
    }

    fn indexed_value(&self, t: &Indexed, vals: &BTreeMap<&IndexName, usize>) -> Result<f64> {
        if t.has_covariant_derivs() {
            return Err(Error::InertOperatorPresent);
        }
        let get = |l: &IndexName| vals.get(l).copied().ok_or_else(|| Error::UnboundIndex(l.to_string()));
        let cov: Vec<usize> = t.cov.iter().map(get).collect::<Result<_>>()?;
        let contra: Vec<usize> = t.contra.iter().map(get).collect::<Result<_>>()?;
        let derivs: Vec<usize> = t.derivs.iter().map(|d| get(&d.index)).collect::<Result<_>>()?;
        let d = self.assign.dim;
        if t.name == DIM && t.rank() == 0 {
            return Ok(if derivs.is_empty() { d as f64 } else { 0.0 });
        }
        if t.name == KDELTA && cov.len() == 1 && contra.len() == 1 {
            return Ok(if !derivs.is_empty() || cov[0] != contra[0] {
                0.0
            } else {
                1.0
            });
        }
        if t.name == ICHR2 && cov.len() == 2 && contra.len() == 1 {
            if !derivs.is_empty() {
                return Err(Error::Unsupported("differentiated ichr2".into()));
            }
            return Ok(self.christoffel(cov[0], cov[1], contra[0]));
        }
        if self.is_metric(&t.name) && t.rank() == 2 {
            return match (cov.as_slice(), contra.as_slice()) {
                ([a, b], []) => Ok(self.metric_jet(*a, *b, &derivs)),
                ([], [a, b]) => self.inverse_jet(*a, *b, &derivs),
                ([a], [b]) => Ok(if !derivs.is_empty() || a != b { 0.0 } else { 1.0 }),
                _ => unreachable!(),
            };
        }
        let rank = t.rank();
        let mut total = 0.0;
        let mut raised = vec![0usize; contra.len()];
        let combos = d.pow(contra.len() as u32);
        for n in 0..combos {
            let mut k = n;
            let mut w = 1.0;
            for (p, u) in contra.iter().enumerate() {
                raised[p] = k % d;
                k /= d;
                w *= self.ginv[(*u, raised[p])];
            }
            if w == 0.0 {
                continue;
            }
            let mut idx = raised.clone();
            idx.extend_from_slice(&cov);
            idx.extend_from_slice(&derivs);
            total += w * self.lower_component(&t.name, rank, &idx);
        }
        Ok(total)
    }

    fn term_value(&self, t: &Term, free: &BTreeMap<IndexName, usize>) -> Result<f64> {
        let dummies: Vec<IndexName> = t.dummies().into_iter().collect();
        let indexed: Vec<&Indexed> = t
            .factors
            .iter()
            .map(|f| match f {
                Factor::Indexed(x) => Ok(x),
                Factor::Wrapped(_) => Err(Error::InertOperatorPresent),
            })
            .collect::<Result<_>>()?;
        if indexed
            .iter()
            .any(|x| x.derivs.iter().any(|d| d.kind == DerivKind::Covariant))
        {
            return Err(Error::InertOperatorPresent);
        }
        let coeff = t.coeff.to_f64().unwrap_or(f64::NAN);
        let d = self.assign.dim;
        let mut vals: BTreeMap<&IndexName, usize> = free.iter().map(|(k, v)| (k, *v)).collect();
        let mut sum = 0.0;
        for n in 0..d.pow(dummies.len() as u32) {
            let mut k = n;
            for l in &dummies {
                vals.insert(l, k % d);
                k /= d;
            }
            let mut prod = coeff;
            for x in &indexed {
                prod *= self.indexed_value(x, &vals)?;
                if prod == 0.0 {
                    break;
                }
            }
            sum += prod;
        }
        Ok(sum)
    }

    /// Value of `expr` with its free indices set by `free`.
    pub fn eval(&self, expr: &Expression, free: &BTreeMap<IndexName, usize>) -> Result<f64> {
        expr.terms.iter().map(|t| self.term_value(t, free)).sum()
    }
}

/// One-shot evaluation; see [`Evaluator`].
pub fn numeric_eval(
    expr: &Expression,
    assign: &ComponentAssignment,
    ctx: &Context,
    free: &BTreeMap<IndexName, usize>,
) -> Result<f64> {
    Evaluator::new(assign, ctx)?.eval(expr, free)
}

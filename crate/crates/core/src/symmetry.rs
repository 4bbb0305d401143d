//! Declared index symmetries and the permutation group they generate.

use std::collections::BTreeMap;

use itertools::Itertools;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expr::{DerivKind, Indexed};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BlockKind {
    Sym,
    Anti,
}

/// A set of slot positions (within one variance class) that may be permuted.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Block {
    pub kind: BlockKind,
    pub positions: Vec<usize>,
}

impl Block {
    pub fn all(kind: BlockKind, arity: usize) -> Self {
        Block {
            kind,
            positions: (0..arity).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SymmetryDeclaration {
    pub name: String,
    pub cov_arity: usize,
    pub contra_arity: usize,
    pub cov_blocks: Vec<Block>,
    pub contra_blocks: Vec<Block>,
}

impl SymmetryDeclaration {
    pub fn new(
        name: impl Into<String>,
        cov_arity: usize,
        contra_arity: usize,
        cov_blocks: Vec<Block>,
        contra_blocks: Vec<Block>,
    ) -> Result<Self> {
        let decl = SymmetryDeclaration {
            name: name.into(),
            cov_arity,
            contra_arity,
            cov_blocks,
            contra_blocks,
        };
        decl.check()?;
        Ok(decl)
    }

    pub fn symmetric(name: impl Into<String>, cov_arity: usize, contra_arity: usize) -> Self {
        let cov_blocks = if cov_arity > 1 {
            vec![Block::all(BlockKind::Sym, cov_arity)]
        } else {
            vec![]
        };
        let contra_blocks = if contra_arity > 1 {
            vec![Block::all(BlockKind::Sym, contra_arity)]
        } else {
            vec![]
        };
        SymmetryDeclaration {
            name: name.into(),
            cov_arity,
            contra_arity,
            cov_blocks,
            contra_blocks,
        }
    }

    fn check(&self) -> Result<()> {
        for (blocks, arity) in [
            (&self.cov_blocks, self.cov_arity),
            (&self.contra_blocks, self.contra_arity),
        ] {
            let mut used = vec![false; arity];
            for b in blocks {
                for &p in &b.positions {
                    if p >= arity {
                        return Err(Error::InvalidSymmetry(format!(
                            "{}: position {} beyond arity {}",
                            self.name,
                            p + 1,
                            arity
                        )));
                    }
                    if std::mem::replace(&mut used[p], true) {
                        return Err(Error::InvalidSymmetry(format!(
                            "{}: blocks overlap at position {}",
                            self.name,
                            p + 1
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    /// The same symmetry with the variance classes exchanged.
    pub fn transposed(&self) -> Self {
        SymmetryDeclaration {
            name: self.name.clone(),
            cov_arity: self.contra_arity,
            contra_arity: self.cov_arity,
            cov_blocks: self.contra_blocks.clone(),
            contra_blocks: self.cov_blocks.clone(),
        }
    }

    pub fn is_trivial(&self) -> bool {
        self.cov_blocks
            .iter()
            .chain(&self.contra_blocks)
            .all(|b| b.positions.len() < 2)
    }
}

/// Symmetry declarations keyed by name and `(cov, contra)` signature.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SymmetryTable {
    decls: BTreeMap<(String, usize, usize), SymmetryDeclaration>,
}

impl SymmetryTable {
    pub fn declare(&mut self, decl: SymmetryDeclaration) -> Result<()> {
        decl.check()?;
        let key = (decl.name.clone(), decl.cov_arity, decl.contra_arity);
        if let Some(existing) = self.decls.get(&key) {
            if *existing != decl {
                return Err(Error::ConflictingDeclaration(decl.name));
            }
            return Ok(());
        }
        self.decls.insert(key, decl);
        Ok(())
    }

    pub fn remove(&mut self, name: &str) {
        self.decls.retain(|(n, _, _), _| n != name);
    }

    /// Declaration for an exact signature, falling back to a declaration
    /// made for the transposed signature (`decsym(F,0,2,...)` also covers
    /// `F([a,b],[])`). Mixed signatures only match exactly.
    pub fn lookup(&self, name: &str, cov: usize, contra: usize) -> Option<SymmetryDeclaration> {
        if let Some(d) = self.decls.get(&(name.to_string(), cov, contra)) {
            return Some(d.clone());
        }
        if cov == 0 || contra == 0 {
            if let Some(d) = self.decls.get(&(name.to_string(), contra, cov)) {
                return Some(d.transposed());
            }
        }
        None
    }

    pub fn for_indexed(&self, t: &Indexed) -> Option<SymmetryDeclaration> {
        self.lookup(&t.name, t.cov.len(), t.contra.len())
    }

    pub fn declarations(&self) -> impl Iterator<Item = &SymmetryDeclaration> {
        self.decls.values()
    }
}

/// Sign of a permutation given as the image sequence.
pub fn permutation_sign(perm: &[usize]) -> i32 {
    let mut inversions = 0;
    for i in 0..perm.len() {
        for j in i + 1..perm.len() {
            if perm[i] > perm[j] {
                inversions += 1;
            }
        }
    }
    if inversions % 2 == 0 {
        1
    } else {
        -1
    }
}

/// Maximal runs of consecutive ordinary derivative slots, as index ranges.
pub fn ordinary_runs(kinds: impl IntoIterator<Item = DerivKind>) -> Vec<std::ops::Range<usize>> {
    let mut runs = Vec::new();
    let mut start = None;
    let mut n = 0;
    for (i, k) in kinds.into_iter().enumerate() {
        match (k, start) {
            (DerivKind::Ordinary, None) => start = Some(i),
            (DerivKind::Covariant, Some(s)) => {
                runs.push(s..i);
                start = None;
            }
            _ => {}
        }
        n = i + 1;
    }
    if let Some(s) = start {
        runs.push(s..n);
    }
    runs
}

fn factorial(n: usize) -> u128 {
    (1..=n as u128).product()
}

/// Number of arrangements [`indexed_variants`] would produce.
pub fn variant_count(t: &Indexed, table: &SymmetryTable) -> u128 {
    let mut count = 1u128;
    if let Some(d) = table.for_indexed(t) {
        for b in d.cov_blocks.iter().chain(&d.contra_blocks) {
            count = count.saturating_mul(factorial(b.positions.len()));
        }
    }
    for r in ordinary_runs(t.derivs.iter().map(|d| d.kind)) {
        count = count.saturating_mul(factorial(r.len()));
    }
    count
}

/// Every arrangement of `t` reachable through its declared symmetry blocks
/// and through reordering commuting partial derivatives, with the sign each
/// arrangement picks up. The identity arrangement comes first.
pub fn indexed_variants(t: &Indexed, table: &SymmetryTable) -> Vec<(Indexed, i32)> {
    let mut out = vec![(t.clone(), 1)];
    let decl = table.for_indexed(t);
    if let Some(d) = &decl {
        for b in &d.cov_blocks {
            out = permute_block(out, b, |x| &mut x.cov);
        }
        for b in &d.contra_blocks {
            out = permute_block(out, b, |x| &mut x.contra);
        }
    }
    for run in ordinary_runs(t.derivs.iter().map(|d| d.kind)) {
        if run.len() < 2 {
            continue;
        }
        let mut next = Vec::new();
        for (base, sign) in &out {
            for perm in run.clone().permutations(run.len()) {
                let mut v = base.clone();
                for (dst, &src) in run.clone().zip(&perm) {
                    v.derivs[dst] = base.derivs[src].clone();
                }
                next.push((v, *sign));
            }
        }
        out = next;
    }
    out
}

fn permute_block(
    items: Vec<(Indexed, i32)>,
    block: &Block,
    slots: impl Fn(&mut Indexed) -> &mut Vec<crate::expr::IndexName>,
) -> Vec<(Indexed, i32)> {
    let k = block.positions.len();
    if k < 2 {
        return items;
    }
    let mut out = Vec::with_capacity(items.len() * factorial(k) as usize);
    for (base, sign) in items {
        for perm in (0..k).permutations(k) {
            let mut v = base.clone();
            let mut src_base = base.clone();
            let src = slots(&mut src_base).clone();
            let dst = slots(&mut v);
            for (i, &p) in perm.iter().enumerate() {
                dst[block.positions[i]] = src[block.positions[p]].clone();
            }
            let s = match block.kind {
                BlockKind::Sym => 1,
                BlockKind::Anti => permutation_sign(&perm),
            };
            out.push((v, sign * s));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sign_of_permutations() {
        assert_eq!(permutation_sign(&[0, 1, 2]), 1);
        assert_eq!(permutation_sign(&[1, 0, 2]), -1);
        assert_eq!(permutation_sign(&[1, 2, 0]), 1);
    }

    #[test]
    fn antisymmetric_rank_two_has_two_variants() {
        let mut table = SymmetryTable::default();
        table
            .declare(SymmetryDeclaration::new("F", 2, 0, vec![Block::all(BlockKind::Anti, 2)], vec![]).unwrap())
            .unwrap();
        let f = Indexed::new("F", ["a", "b"], Vec::<&str>::new());
        let v = indexed_variants(&f, &table);
        assert_eq!(v.len(), 2);
        assert_eq!(v[1].0.cov, vec!["b".into(), "a".into()]);
        assert_eq!(v[1].1, -1);
    }

    #[test]
    fn transposed_declaration_applies() {
        let mut table = SymmetryTable::default();
        table
            .declare(SymmetryDeclaration::new("F", 0, 2, vec![], vec![Block::all(BlockKind::Anti, 2)]).unwrap())
            .unwrap();
        assert!(table.lookup("F", 2, 0).is_some());
        assert!(table.lookup("F", 1, 1).is_none());
    }

    #[test]
    fn conflicting_redeclaration() {
        let mut table = SymmetryTable::default();
        table.declare(SymmetryDeclaration::symmetric("S", 2, 0)).unwrap();
        table.declare(SymmetryDeclaration::symmetric("S", 2, 0)).unwrap();
        let anti = SymmetryDeclaration::new("S", 2, 0, vec![Block::all(BlockKind::Anti, 2)], vec![]).unwrap();
        assert_eq!(table.declare(anti), Err(Error::ConflictingDeclaration("S".into())));
    }

    #[test]
    fn overlapping_blocks_rejected() {
        let bad = SymmetryDeclaration::new(
            "T",
            3,
            0,
            vec![
                Block {
                    kind: BlockKind::Sym,
                    positions: vec![0, 1],
                },
                Block {
                    kind: BlockKind::Anti,
                    positions: vec![1, 2],
                },
            ],
            vec![],
        );
        assert!(matches!(bad, Err(Error::InvalidSymmetry(_))));
    }

    #[test]
    fn partial_runs_commute_but_covariant_slots_do_not() {
        let t = Indexed::new("A", ["m"], Vec::<&str>::new())
            .with_derivs(["x", "y"])
            .with_covariant("z")
            .with_derivs(["u"]);
        let runs = ordinary_runs(t.derivs.iter().map(|d| d.kind));
        assert_eq!(runs, vec![0..2, 3..4]);
        assert_eq!(variant_count(&t, &SymmetryTable::default()), 2);
    }
}

//! Rule-based composition that follows a binary overlap pattern note by note.
//!
//! Where cycles survive, the new note is drawn uniformly from the nodes all
//! surviving cycles share. Where none survive, it comes from the node pool,
//! minus the shared nodes of whichever neighbouring positions do have survivors.
//! Positions before the first and after the last note count as having none.

use std::collections::BTreeSet;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nodepool::NodePool;
use crate::overlap::{binarize, survivors, MatrixKind, OverlapMatrix, SurvivalSet};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Policy {
    /// Fail when a constraint cannot be met.
    #[default]
    Strict,
    /// Widen the candidate set instead of failing, and record where that happened.
    Lenient,
}

impl FromStr for Policy {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "strict" => Ok(Policy::Strict),
            "lenient" => Ok(Policy::Lenient),
            other => Err(format!("unknown policy {other:?}, expected strict or lenient")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Fallback {
    /// Surviving cycles share no node; drew from their union instead.
    CycleUnion,
    /// Every pool node was excluded; drew from the whole pool instead.
    FullPool,
}

pub struct CompositionContext<'a> {
    matrix: OverlapMatrix,
    survival: SurvivalSet,
    cycles: &'a [BTreeSet<usize>],
    pool: &'a NodePool,
    policy: Policy,
}

impl<'a> CompositionContext<'a> {
    /// Integer matrices are binarized first.
    pub fn new(matrix: &OverlapMatrix, cycles: &'a [BTreeSet<usize>], pool: &'a NodePool, policy: Policy) -> Result<Self> {
        let matrix = match matrix.kind() {
            MatrixKind::Binary => matrix.clone(),
            MatrixKind::Integer => binarize(matrix),
        };
        if let Some(bad) = cycles.iter().flatten().find(|&&n| n >= pool.len()) {
            return Err(Error::DimensionMismatch(format!("cycle node {bad} outside pool of {} nodes", pool.len())));
        }
        let survival = survivors(&matrix, cycles)?;
        Ok(CompositionContext { matrix, survival, cycles, pool, policy })
    }

    pub fn len(&self) -> usize {
        self.matrix.d()
    }

    pub fn is_empty(&self) -> bool {
        self.matrix.d() == 0
    }

    pub fn survival(&self) -> &SurvivalSet {
        &self.survival
    }

    pub fn policy(&self) -> Policy {
        self.policy
    }

    /// Nodes barred at a position with no survivors: the shared nodes of
    /// neighbours that have survivors.
    pub fn exclusions(&self, j: usize) -> BTreeSet<usize> {
        let mut out = BTreeSet::new();
        if j > 0 && self.survival.any_survive(j - 1) {
            out.extend(&self.survival.intersections[j - 1]);
        }
        if j + 1 < self.len() && self.survival.any_survive(j + 1) {
            out.extend(&self.survival.intersections[j + 1]);
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Composition {
    pub notes: Vec<usize>,
    pub fallbacks: Vec<(usize, Fallback)>,
}

fn pick_uniform<R: Rng + ?Sized>(rng: &mut R, set: &BTreeSet<usize>) -> usize {
    let k = rng.gen_range(0..set.len());
    *set.iter().nth(k).expect("index below set length")
}

pub fn compose<R: Rng + ?Sized>(ctx: &CompositionContext<'_>, rng: &mut R) -> Result<Composition> {
    let mut notes = Vec::with_capacity(ctx.len());
    let mut fallbacks = Vec::new();
    for j in 0..ctx.len() {
        if ctx.survival.any_survive(j) {
            let shared = &ctx.survival.intersections[j];
            if !shared.is_empty() {
                notes.push(pick_uniform(rng, shared));
                continue;
            }
            if ctx.policy == Policy::Strict {
                return Err(Error::EmptyIntersection { position: j });
            }
            let union: BTreeSet<usize> = ctx.survival.survivors[j].iter().flat_map(|&i| ctx.cycles[i].iter().copied()).collect();
            if union.is_empty() {
                fallbacks.push((j, Fallback::FullPool));
                notes.push(ctx.pool.sample(rng, &BTreeSet::new())?);
            } else {
                fallbacks.push((j, Fallback::CycleUnion));
                notes.push(pick_uniform(rng, &union));
            }
            continue;
        }
        let exclude = ctx.exclusions(j);
        match ctx.pool.sample(rng, &exclude) {
            Ok(node) => notes.push(node),
            Err(Error::EmptySamplingSupport) if ctx.policy == Policy::Lenient => {
                fallbacks.push((j, Fallback::FullPool));
                notes.push(ctx.pool.sample(rng, &BTreeSet::new())?);
            }
            Err(e) => return Err(e),
        }
    }
    Ok(Composition { notes, fallbacks })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PatternReport {
    /// Whether each position meets its constraint.
    pub satisfied: Vec<bool>,
    pub violations: Vec<usize>,
    pub passed: bool,
}

/// Checks each position of `output` against the constraint `compose` enforces.
pub fn verify_pattern(output: &[usize], ctx: &CompositionContext<'_>) -> PatternReport {
    let satisfied: Vec<bool> = (0..ctx.len())
        .map(|j| {
            let Some(&node) = output.get(j) else {
                return false;
            };
            if ctx.survival.any_survive(j) {
                ctx.survival.intersections[j].contains(&node)
            } else {
                node < ctx.pool.len() && !ctx.exclusions(j).contains(&node)
            }
        })
        .collect();
    let mut violations: Vec<usize> = satisfied.iter().enumerate().filter(|(_, ok)| !**ok).map(|(j, _)| j).collect();
    if output.len() > ctx.len() {
        violations.extend(ctx.len()..output.len());
    }
    PatternReport { passed: violations.is_empty(), satisfied, violations }
}

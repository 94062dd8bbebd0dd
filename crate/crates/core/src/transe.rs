//! TransE relation embeddings.
//!
//! Triples are scored by `d(h + r, t)` under the L1 or L2 norm and trained
//! with the margin ranking loss `max(0, margin + d(h + r, t) - d(h' + r, t'))`
//! against uniformly corrupted heads or tails, using plain SGD. Node vectors
//! are renormalized to unit length after every epoch. Training is
//! single-threaded and fully determined by the seed.

use std::collections::HashMap;
use std::io::{BufRead, Write};
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::concept::{ConceptId, RelationId};
use crate::error::{KgError, Result};
use crate::graph::{KnowledgeGraph, Triple};
use crate::par;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Norm {
    L1,
    L2,
}

impl FromStr for Norm {
    type Err = KgError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "l1" => Ok(Norm::L1),
            "l2" => Ok(Norm::L2),
            other => Err(KgError::InvalidConfig(format!("unknown norm {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub dim: usize,
    pub margin: f64,
    pub learning_rate: f64,
    pub epochs: usize,
    pub negatives_per_positive: usize,
    pub norm: Norm,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            dim: 100,
            margin: 1.0,
            learning_rate: 0.01,
            epochs: 100,
            negatives_per_positive: 1,
            norm: Norm::L2,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(KgError::InvalidConfig(format!("{what} must be positive")));
        if self.dim == 0 {
            return bad("dim");
        }
        if !(self.margin > 0.0 && self.margin.is_finite()) {
            return bad("margin");
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return bad("learning_rate");
        }
        if self.epochs == 0 {
            return bad("epochs");
        }
        if self.negatives_per_positive == 0 {
            return bad("negatives_per_positive");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingSpace {
    pub dim: usize,
    pub norm: Norm,
    pub nodes: Vec<ConceptId>,
    /// Row-major `nodes.len() x dim`.
    pub node_vectors: Vec<f64>,
    pub relations: Vec<RelationId>,
    /// Row-major `relations.len() x dim`.
    pub relation_vectors: Vec<f64>,
    /// Summed margin loss of each epoch, measured before each update.
    pub loss_history: Vec<f64>,
    pub final_loss: f64,
    #[serde(skip)]
    node_lookup: HashMap<ConceptId, usize>,
    #[serde(skip)]
    relation_lookup: HashMap<RelationId, usize>,
}

impl EmbeddingSpace {
    fn new(dim: usize, norm: Norm, nodes: Vec<ConceptId>, relations: Vec<RelationId>) -> Self {
        let node_lookup = nodes.iter().cloned().enumerate().map(|(i, c)| (c, i)).collect();
        let relation_lookup = relations.iter().cloned().enumerate().map(|(i, r)| (r, i)).collect();
        EmbeddingSpace {
            dim,
            norm,
            node_vectors: vec![0.0; nodes.len() * dim],
            relation_vectors: vec![0.0; relations.len() * dim],
            nodes,
            relations,
            loss_history: Vec::new(),
            final_loss: 0.0,
            node_lookup,
            relation_lookup,
        }
    }

    pub fn node_index(&self, c: &str) -> Option<usize> {
        self.node_lookup.get(c).copied()
    }

    pub fn relation_index(&self, r: &str) -> Option<usize> {
        self.relation_lookup.get(r).copied()
    }

    pub fn node_vector(&self, i: usize) -> &[f64] {
        &self.node_vectors[i * self.dim..(i + 1) * self.dim]
    }

    pub fn relation_vector(&self, i: usize) -> &[f64] {
        &self.relation_vectors[i * self.dim..(i + 1) * self.dim]
    }

    fn node_vector_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.node_vectors[i * self.dim..(i + 1) * self.dim]
    }

    pub fn distance(&self, h: usize, r: usize, t: usize) -> f64 {
        distance(self.node_vector(h), self.relation_vector(r), self.node_vector(t), self.norm)
    }

    fn normalize_nodes(&mut self) {
        for i in 0..self.nodes.len() {
            normalize(self.node_vector_mut(i));
        }
    }
}

fn normalize(v: &mut [f64]) {
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if n > 0.0 {
        v.iter_mut().for_each(|x| *x /= n);
    }
}

/// `||h + r - t||` under `norm`.
pub fn distance(h: &[f64], r: &[f64], t: &[f64], norm: Norm) -> f64 {
    let diff = h.iter().zip(r).zip(t).map(|((h, r), t)| h + r - t);
    match norm {
        Norm::L1 => diff.map(f64::abs).sum(),
        Norm::L2 => diff.map(|x| x * x).sum::<f64>().sqrt(),
    }
}

/// Gradient of `distance` with respect to `h + r - t`.
fn distance_grad(h: &[f64], r: &[f64], t: &[f64], norm: Norm) -> Vec<f64> {
    let diff: Vec<f64> = h.iter().zip(r).zip(t).map(|((h, r), t)| h + r - t).collect();
    match norm {
        Norm::L1 => diff.iter().map(|x| x.signum() * (*x != 0.0) as u8 as f64).collect(),
        Norm::L2 => {
            let n = diff.iter().map(|x| x * x).sum::<f64>().sqrt();
            if n == 0.0 {
                vec![0.0; diff.len()]
            } else {
                diff.iter().map(|x| x / n).collect()
            }
        }
    }
}

/// Vectors of one positive triple and its corruption (sharing the relation).
#[derive(Debug, Clone, Copy)]
pub struct TermInputs<'a> {
    pub head: &'a [f64],
    pub relation: &'a [f64],
    pub tail: &'a [f64],
    pub corrupt_head: &'a [f64],
    pub corrupt_tail: &'a [f64],
}

#[derive(Debug, Clone, PartialEq)]
pub struct TermGradient {
    pub head: Vec<f64>,
    pub relation: Vec<f64>,
    pub tail: Vec<f64>,
    pub corrupt_head: Vec<f64>,
    pub corrupt_tail: Vec<f64>,
}

pub fn margin_term(x: TermInputs<'_>, margin: f64, norm: Norm) -> f64 {
    let pos = distance(x.head, x.relation, x.tail, norm);
    let neg = distance(x.corrupt_head, x.relation, x.corrupt_tail, norm);
    let v = margin + (pos - neg);
    // NaN must survive so that divergence is detected.
    if v > 0.0 || v.is_nan() {
        v
    } else {
        0.0
    }
}

/// Value and gradient of the hinge term. The gradient is zero where the
/// hinge is inactive.
pub fn margin_term_grad(x: TermInputs<'_>, margin: f64, norm: Norm) -> (f64, TermGradient) {
    let value = margin_term(x, margin, norm);
    let dim = x.head.len();
    if value <= 0.0 {
        let z = vec![0.0; dim];
        return (
            value,
            TermGradient { head: z.clone(), relation: z.clone(), tail: z.clone(), corrupt_head: z.clone(), corrupt_tail: z },
        );
    }
    let gp = distance_grad(x.head, x.relation, x.tail, norm);
    let gn = distance_grad(x.corrupt_head, x.relation, x.corrupt_tail, norm);
    let grad = TermGradient {
        relation: gp.iter().zip(&gn).map(|(p, n)| p - n).collect(),
        tail: gp.iter().map(|p| -p).collect(),
        corrupt_head: gn.iter().map(|n| -n).collect(),
        corrupt_tail: gn.clone(),
        head: gp,
    };
    (value, grad)
}

/// Random initialization: uniform in `±6/sqrt(dim)`, relations and nodes
/// normalized to unit length.
pub fn init_space(g: &KnowledgeGraph, cfg: &TrainConfig) -> Result<EmbeddingSpace> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut space = EmbeddingSpace::new(cfg.dim, cfg.norm, g.nodes().to_vec(), g.relations().to_vec());
    init_with(&mut space, &mut rng);
    Ok(space)
}

fn init_with(space: &mut EmbeddingSpace, rng: &mut ChaCha8Rng) {
    let bound = 6.0 / (space.dim as f64).sqrt();
    for x in space.relation_vectors.iter_mut() {
        *x = rng.gen_range(-bound..bound);
    }
    for x in space.node_vectors.iter_mut() {
        *x = rng.gen_range(-bound..bound);
    }
    for r in 0..space.relations.len() {
        let dim = space.dim;
        normalize(&mut space.relation_vectors[r * dim..(r + 1) * dim]);
    }
    space.normalize_nodes();
}

pub fn train_transe(g: &KnowledgeGraph, cfg: &TrainConfig) -> Result<EmbeddingSpace> {
    cfg.validate()?;
    if g.is_empty() {
        return Err(KgError::EmptyGraph);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut space = EmbeddingSpace::new(cfg.dim, cfg.norm, g.nodes().to_vec(), g.relations().to_vec());
    init_with(&mut space, &mut rng);

    let n_nodes = g.node_count();
    let dim = cfg.dim;
    let mut order: Vec<usize> = (0..g.edge_count()).collect();
    let mut last_loss = 0.0;
    for epoch in 0..cfg.epochs {
        order.shuffle(&mut rng);
        let mut epoch_loss = 0.0;
        for &ei in &order {
            let e = g.edges()[ei];
            let (h, r, t) = (e.head as usize, e.relation as usize, e.tail as usize);
            for _ in 0..cfg.negatives_per_positive {
                let replace_head = rng.gen_bool(0.5);
                let other = rng.gen_range(0..n_nodes);
                let (ch, ct) = if replace_head { (other, t) } else { (h, other) };
                let inputs = TermInputs {
                    head: space.node_vector(h),
                    relation: space.relation_vector(r),
                    tail: space.node_vector(t),
                    corrupt_head: space.node_vector(ch),
                    corrupt_tail: space.node_vector(ct),
                };
                let (value, grad) = margin_term_grad(inputs, cfg.margin, cfg.norm);
                if !value.is_finite() {
                    return Err(KgError::NonFiniteLoss { epoch, last_loss });
                }
                epoch_loss += value;
                if value <= 0.0 {
                    continue;
                }
                let lr = cfg.learning_rate;
                let step = |v: &mut [f64], g: &[f64]| v.iter_mut().zip(g).for_each(|(x, d)| *x -= lr * d);
                step(&mut space.relation_vectors[r * dim..(r + 1) * dim], &grad.relation);
                step(space.node_vector_mut(h), &grad.head);
                step(space.node_vector_mut(t), &grad.tail);
                step(space.node_vector_mut(ch), &grad.corrupt_head);
                step(space.node_vector_mut(ct), &grad.corrupt_tail);
            }
        }
        if !epoch_loss.is_finite() {
            return Err(KgError::NonFiniteLoss { epoch, last_loss });
        }
        space.normalize_nodes();
        space.loss_history.push(epoch_loss);
        last_loss = epoch_loss;
    }
    space.final_loss = last_loss;
    Ok(space)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinkPredictionReport {
    pub queries: usize,
    pub candidates: usize,
    pub mean_rank: f64,
    pub hits_at_10: f64,
}

/// Raw tail ranking: each held-out `(h, r, t)` ranks `t` among `candidates`
/// by `d(h + r, c)` ascending, ties broken by concept string.
pub fn link_prediction_eval(
    space: &EmbeddingSpace,
    heldout: &[Triple],
    candidates: &[ConceptId],
) -> Result<LinkPredictionReport> {
    let node = |c: &ConceptId| space.node_index(c.as_str()).ok_or_else(|| KgError::UnknownNode(c.to_string()));
    let cand: Vec<(usize, &ConceptId)> = candidates.iter().map(|c| node(c).map(|i| (i, c))).collect::<Result<_>>()?;
    let mut queries = Vec::with_capacity(heldout.len());
    for t in heldout {
        let r = space
            .relation_index(t.relation.as_str())
            .ok_or_else(|| KgError::InconsistentInputs(format!("relation {} has no embedding", t.relation)))?;
        queries.push((node(&t.head)?, r, node(&t.tail)?, &t.tail));
    }
    let ranks = par::map(&queries, |&(h, r, t, t_name)| {
        let target = space.distance(h, r, t);
        1 + cand
            .iter()
            .filter(|&&(c, name)| {
                let d = space.distance(h, r, c);
                d < target || (d == target && name < t_name)
            })
            .count()
    });
    let n = ranks.len();
    let mean_rank = if n == 0 { 0.0 } else { ranks.iter().sum::<usize>() as f64 / n as f64 };
    let hits = if n == 0 { 0.0 } else { ranks.iter().filter(|&&r| r <= 10).count() as f64 / n as f64 };
    Ok(LinkPredictionReport { queries: n, candidates: cand.len(), mean_rank, hits_at_10: hits })
}

/// Writes `relation<TAB>v1<TAB>...<TAB>vdim` rows sorted by relation label.
pub fn export_relation_matrix<W: Write>(space: &EmbeddingSpace, mut out: W) -> Result<()> {
    let mut order: Vec<usize> = (0..space.relations.len()).collect();
    order.sort_by(|&a, &b| space.relations[a].cmp(&space.relations[b]));
    for r in order {
        write!(out, "{}", space.relations[r])?;
        for x in space.relation_vector(r) {
            write!(out, "\t{x}")?;
        }
        writeln!(out)?;
    }
    out.flush()?;
    Ok(())
}

/// Same layout as the relation matrix, for node vectors.
pub fn export_node_matrix<W: Write>(space: &EmbeddingSpace, mut out: W) -> Result<()> {
    let mut order: Vec<usize> = (0..space.nodes.len()).collect();
    order.sort_by(|&a, &b| space.nodes[a].cmp(&space.nodes[b]));
    for n in order {
        write!(out, "{}", space.nodes[n])?;
        for x in space.node_vector(n) {
            write!(out, "\t{x}")?;
        }
        writeln!(out)?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_relation_matrix<R: BufRead>(input: R) -> Result<Vec<(RelationId, Vec<f64>)>> {
    let mut out = Vec::new();
    let mut dim = None;
    for (i, line) in input.lines().enumerate() {
        let line = line?;
        if line.is_empty() {
            continue;
        }
        let malformed = |reason: String| KgError::MalformedRow { line: i + 1, reason };
        let mut fields = line.split('\t');
        let rel = RelationId::new(fields.next().unwrap_or("")).map_err(|e| malformed(e.to_string()))?;
        let v: Vec<f64> = fields
            .map(|f| f.parse::<f64>().map_err(|_| malformed(format!("invalid number {f:?}"))))
            .collect::<Result<_>>()?;
        if *dim.get_or_insert(v.len()) != v.len() || v.is_empty() {
            return Err(malformed("inconsistent dimension".into()));
        }
        out.push((rel, v));
    }
    Ok(out)
}

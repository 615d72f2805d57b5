//! Bounded-variable primal network simplex on the bipartite transport graph.
//!
//! Nodes `0..m` are sources (supply `f_i`), nodes `m..m+n` are sinks
//! (demand `g_j`) and node `m+n` is an artificial root. Real arcs `i -> j`
//! carry index `i * n + j`; artificial arcs connect every other node to the
//! root and follow the real arcs in index order. Artificial arcs cost one
//! unit of a symbolic big-M, so costs and potentials are pairs
//! `(big, small)` compared lexicographically and no numeric M is needed.
//!
//! The basis is kept strongly feasible (every zero-flow tree arc can carry
//! flow towards the root) and the leaving arc follows Cunningham's rule:
//! the last blocking arc met when walking the cycle from its apex in the
//! direction of the push. That alone rules out cycling. Entering arcs come
//! from block pricing and, after a run of degenerate pivots, from Bland's
//! lowest-index rule.

use std::cmp::Ordering;
use std::collections::VecDeque;

use crate::config::{MAX_EXACT_BITS, SOLVER_REL_TOL};
use crate::error::{Error, Result};
use crate::problem::DiscreteProblem;
use crate::scalar::{Mode, Scalar};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArcState {
    Lower,
    Upper,
    Tree,
}

/// `big * M + small` for a symbolic, arbitrarily large `M`.
#[derive(Debug, Clone, PartialEq)]
pub struct Lex<T> {
    pub big: i64,
    pub small: T,
}

impl<T: Scalar> Lex<T> {
    fn zero() -> Self {
        Self { big: 0, small: T::zero() }
    }

    fn add(&self, other: &Self) -> Self {
        Self { big: self.big + other.big, small: self.small.clone() + other.small.clone() }
    }

    fn sub(&self, other: &Self) -> Self {
        Self { big: self.big - other.big, small: self.small.clone() - other.small.clone() }
    }

    fn neg(&self) -> Self {
        Self { big: -self.big, small: -self.small.clone() }
    }

    /// Lexicographic sign, treating `|small| <= tol` as zero.
    fn sign(&self, tol: &T) -> Ordering {
        match self.big.cmp(&0) {
            Ordering::Equal if self.small > *tol => Ordering::Greater,
            Ordering::Equal if self.small < -tol.clone() => Ordering::Less,
            Ordering::Equal => Ordering::Equal,
            other => other,
        }
    }

    fn cmp_lex(&self, other: &Self) -> Ordering {
        self.big
            .cmp(&other.big)
            .then_with(|| self.small.partial_cmp(&other.small).unwrap_or(Ordering::Equal))
    }

    /// Numeric value for a concrete `M`.
    pub fn at(&self, big_m: &T) -> T {
        T::from_int(self.big) * big_m.clone() + self.small.clone()
    }
}

/// Final basis, enough to rebuild a dual certificate.
#[derive(Debug, Clone)]
pub struct Basis<T> {
    /// Node potentials; reduced cost of arc `a` is `c_a + pi_tail - pi_head`.
    pub potentials: Vec<Lex<T>>,
    /// States of the real arcs in row-major `(i, j)` order.
    pub states: Vec<ArcState>,
}

#[derive(Debug, Clone)]
pub(crate) struct Outcome<T> {
    /// Flows on real arcs, row-major.
    pub flows: Vec<T>,
    /// Total flow left on artificial arcs.
    pub artificial_flow: T,
    pub basis: Basis<T>,
    pub pivots: usize,
    pub degenerate_pivots: usize,
    pub bland_pivots: usize,
}

#[derive(Debug, Clone)]
pub struct SolverOptions {
    pub max_exact_bits: u64,
    /// Pricing block length; `None` picks `max(sqrt(arcs), 10)`.
    pub block_size: Option<usize>,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self { max_exact_bits: MAX_EXACT_BITS, block_size: None }
    }
}

enum Leaving {
    /// The entering arc jumps to its other bound.
    BoundFlip,
    /// Pred arc of this node leaves, from the `first` (true) or `second`
    /// side of the cycle.
    Node(usize, bool),
}

struct NetworkSimplex<T> {
    m: usize,
    n: usize,
    root: usize,
    tail: Vec<usize>,
    head: Vec<usize>,
    cost: Vec<Lex<T>>,
    upper: Vec<Option<T>>,
    flow: Vec<T>,
    state: Vec<ArcState>,
    tree_arcs: Vec<usize>,

    parent: Vec<usize>,
    pred: Vec<usize>,
    /// Whether `pred[u]` points from `u` to its parent.
    up: Vec<bool>,
    depth: Vec<usize>,
    potential: Vec<Lex<T>>,
    adjacency: Vec<Vec<usize>>,

    cost_tol: T,
    flow_tol: T,
    block_size: usize,
    next_arc: usize,
    max_bits: u64,
}

pub(crate) fn run<T: Scalar>(p: &DiscreteProblem<T>, options: &SolverOptions) -> Result<Outcome<T>> {
    let mut ns = NetworkSimplex::new(p, options);
    ns.rebuild_tree()?;

    let (m, n) = (ns.m, ns.n);
    let bland_after = m + n;
    let stall_limit = m * n + m + n;
    let mut pivots = 0usize;
    let mut degenerate_pivots = 0usize;
    let mut bland_pivots = 0usize;
    let mut degenerate_streak = 0usize;

    loop {
        let bland = degenerate_streak >= bland_after;
        let entering = if bland { ns.bland_entering() } else { ns.block_entering() };
        let Some(entering) = entering else { break };
        if bland {
            bland_pivots += 1;
            if T::MODE == Mode::Float && degenerate_streak > bland_after + stall_limit {
                return Err(Error::SolverFailure(format!(
                    "no progress after {degenerate_streak} consecutive degenerate pivots"
                )));
            }
        }
        let moved = ns.pivot(entering)?;
        pivots += 1;
        if moved {
            degenerate_streak = 0;
        } else {
            degenerate_pivots += 1;
            degenerate_streak += 1;
        }
    }

    let real = m * n;
    let artificial_flow = ns.flow[real..].iter().fold(T::zero(), |acc, v| acc + v.clone());
    Ok(Outcome {
        flows: ns.flow[..real].to_vec(),
        artificial_flow,
        basis: Basis { potentials: ns.potential.clone(), states: ns.state[..real].to_vec() },
        pivots,
        degenerate_pivots,
        bland_pivots,
    })
}

impl<T: Scalar> NetworkSimplex<T> {
    fn new(p: &DiscreteProblem<T>, options: &SolverOptions) -> Self {
        let (m, n) = (p.rows(), p.cols());
        let nodes = m + n + 1;
        let root = m + n;
        let arcs = m * n + m + n;

        let mut tail = Vec::with_capacity(arcs);
        let mut head = Vec::with_capacity(arcs);
        let mut cost = Vec::with_capacity(arcs);
        let mut upper = Vec::with_capacity(arcs);
        let mut flow = Vec::with_capacity(arcs);
        let mut state = Vec::with_capacity(arcs);
        for i in 0..m {
            for j in 0..n {
                tail.push(i);
                head.push(m + j);
                cost.push(Lex { big: 0, small: p.cost()[(i, j)].clone() });
                upper.push(Some(p.capacity()[(i, j)].clone()));
                flow.push(T::zero());
                state.push(ArcState::Lower);
            }
        }
        // Node supplies: f_i at sources, -g_j at sinks. Nodes with
        // non-negative supply point their artificial arc at the root, so
        // zero-flow artificial arcs are directed towards it.
        let mut tree_arcs = Vec::with_capacity(m + n);
        for k in 0..m + n {
            let supply = if k < m { p.f()[k].clone() } else { -p.g()[k - m].clone() };
            let a = tail.len();
            if supply.is_negative() {
                tail.push(root);
                head.push(k);
                flow.push(-supply);
            } else {
                tail.push(k);
                head.push(root);
                flow.push(supply);
            }
            cost.push(Lex { big: 1, small: T::zero() });
            upper.push(None);
            state.push(ArcState::Tree);
            tree_arcs.push(a);
        }

        let cost_scale = p.cost_scale().max(f64::MIN_POSITIVE);
        let mass_scale = p.total_mass().to_f64().abs().max(f64::MIN_POSITIVE);
        let block_size = options
            .block_size
            .unwrap_or_else(|| ((arcs as f64).sqrt().ceil() as usize).max(10))
            .clamp(1, arcs.max(1));

        Self {
            m,
            n,
            root,
            tail,
            head,
            cost,
            upper,
            flow,
            state,
            tree_arcs,
            parent: vec![usize::MAX; nodes],
            pred: vec![usize::MAX; nodes],
            up: vec![false; nodes],
            depth: vec![0; nodes],
            potential: vec![Lex::zero(); nodes],
            adjacency: vec![Vec::new(); nodes],
            cost_tol: T::eps(SOLVER_REL_TOL * cost_scale),
            flow_tol: T::eps(SOLVER_REL_TOL * mass_scale),
            block_size,
            next_arc: 0,
            max_bits: options.max_exact_bits,
        }
    }

    /// Recomputes parents, depths and potentials from the tree arc set.
    fn rebuild_tree(&mut self) -> Result<()> {
        for list in &mut self.adjacency {
            list.clear();
        }
        for &a in &self.tree_arcs {
            self.adjacency[self.tail[a]].push(a);
            self.adjacency[self.head[a]].push(a);
        }
        let mut queue = VecDeque::from([self.root]);
        self.parent[self.root] = usize::MAX;
        self.pred[self.root] = usize::MAX;
        self.depth[self.root] = 0;
        self.potential[self.root] = Lex::zero();
        let mut seen = 1;
        while let Some(u) = queue.pop_front() {
            for idx in 0..self.adjacency[u].len() {
                let a = self.adjacency[u][idx];
                if a == self.pred[u] {
                    continue;
                }
                let (child, up) = if self.tail[a] == u { (self.head[a], false) } else { (self.tail[a], true) };
                self.parent[child] = u;
                self.pred[child] = a;
                self.up[child] = up;
                self.depth[child] = self.depth[u] + 1;
                // Tree arcs have zero reduced cost c + pi_tail - pi_head.
                self.potential[child] = if up {
                    self.potential[u].sub(&self.cost[a])
                } else {
                    self.potential[u].add(&self.cost[a])
                };
                if T::MODE == Mode::Exact {
                    let bits = self.potential[child].small.magnitude_bits();
                    if bits > self.max_bits {
                        return Err(Error::Resource { bits, limit: self.max_bits });
                    }
                }
                seen += 1;
                queue.push_back(child);
            }
        }
        if seen != self.parent.len() {
            return Err(Error::SolverFailure("basis is not a spanning tree".into()));
        }
        Ok(())
    }

    fn reduced_cost(&self, a: usize) -> Lex<T> {
        self.cost[a].add(&self.potential[self.tail[a]]).sub(&self.potential[self.head[a]])
    }

    /// Negative when moving arc `a` off its bound lowers the objective.
    fn violation(&self, a: usize) -> Option<Lex<T>> {
        let v = match self.state[a] {
            ArcState::Tree => return None,
            ArcState::Lower => self.reduced_cost(a),
            ArcState::Upper => self.reduced_cost(a).neg(),
        };
        (v.sign(&self.cost_tol) == Ordering::Less).then_some(v)
    }

    fn block_entering(&mut self) -> Option<usize> {
        let arcs = self.tail.len();
        let mut best: Option<(usize, Lex<T>)> = None;
        let mut in_block = 0;
        for k in 0..arcs {
            let a = (self.next_arc + k) % arcs;
            if let Some(v) = self.violation(a) {
                let better = match &best {
                    None => true,
                    Some((b, bv)) => match v.cmp_lex(bv) {
                        Ordering::Less => true,
                        Ordering::Equal => a < *b,
                        Ordering::Greater => false,
                    },
                };
                if better {
                    best = Some((a, v));
                }
            }
            in_block += 1;
            if in_block == self.block_size {
                if best.is_some() {
                    self.next_arc = (a + 1) % arcs;
                    break;
                }
                in_block = 0;
            }
        }
        best.map(|(a, _)| a)
    }

    fn bland_entering(&self) -> Option<usize> {
        (0..self.tail.len()).find(|&a| self.violation(a).is_some())
    }

    fn residual_lt(d: &T, delta: &Option<T>) -> bool {
        delta.as_ref().map_or(true, |x| d < x)
    }

    fn residual_le(d: &T, delta: &Option<T>) -> bool {
        delta.as_ref().map_or(true, |x| d <= x)
    }

    /// Performs one pivot; returns whether any flow moved.
    fn pivot(&mut self, entering: usize) -> Result<bool> {
        let lower = self.state[entering] == ArcState::Lower;
        let (first, second) = if lower {
            (self.tail[entering], self.head[entering])
        } else {
            (self.head[entering], self.tail[entering])
        };

        let join = self.join(first, second);
        let mut delta: Option<T> = self.upper[entering].clone();
        let mut leaving = Leaving::BoundFlip;

        // Flow runs join -> first, across the entering arc, second -> join.
        let mut u = first;
        while u != join {
            let a = self.pred[u];
            let d = if self.up[u] { Some(self.flow[a].clone()) } else { self.slack(a) };
            if let Some(d) = d {
                if Self::residual_lt(&d, &delta) {
                    delta = Some(d);
                    leaving = Leaving::Node(u, true);
                }
            }
            u = self.parent[u];
        }
        let mut u = second;
        while u != join {
            let a = self.pred[u];
            let d = if self.up[u] { self.slack(a) } else { Some(self.flow[a].clone()) };
            if let Some(d) = d {
                if Self::residual_le(&d, &delta) {
                    delta = Some(d);
                    leaving = Leaving::Node(u, false);
                }
            }
            u = self.parent[u];
        }

        let Some(delta) = delta else {
            return Err(Error::SolverFailure("unbounded improving cycle".into()));
        };
        let delta = if delta < T::zero() { T::zero() } else { delta };
        let moved = delta > self.flow_tol;

        if delta > T::zero() {
            if lower {
                self.add_flow(entering, &delta);
            } else {
                self.add_flow(entering, &-delta.clone());
            }
            let mut u = first;
            while u != join {
                let a = self.pred[u];
                let step = if self.up[u] { -delta.clone() } else { delta.clone() };
                self.add_flow(a, &step);
                u = self.parent[u];
            }
            let mut u = second;
            while u != join {
                let a = self.pred[u];
                let step = if self.up[u] { delta.clone() } else { -delta.clone() };
                self.add_flow(a, &step);
                u = self.parent[u];
            }
            if T::MODE == Mode::Exact && delta.magnitude_bits() > self.max_bits {
                return Err(Error::Resource { bits: delta.magnitude_bits(), limit: self.max_bits });
            }
        }

        match leaving {
            Leaving::BoundFlip => {
                if lower {
                    self.state[entering] = ArcState::Upper;
                    self.flow[entering] = self.upper[entering].clone().expect("finite bound");
                } else {
                    self.state[entering] = ArcState::Lower;
                    self.flow[entering] = T::zero();
                }
            }
            Leaving::Node(u, first_side) => {
                let out = self.pred[u];
                // The residual that hit zero decides which bound it rests at.
                let at_upper = if first_side { !self.up[u] } else { self.up[u] };
                if at_upper {
                    self.state[out] = ArcState::Upper;
                    self.flow[out] = self.upper[out].clone().expect("finite bound");
                } else {
                    self.state[out] = ArcState::Lower;
                    self.flow[out] = T::zero();
                }
                self.state[entering] = ArcState::Tree;
                let slot = self.tree_arcs.iter().position(|&a| a == out).expect("leaving arc is in the tree");
                self.tree_arcs[slot] = entering;
                self.rebuild_tree()?;
            }
        }
        Ok(moved)
    }

    fn slack(&self, a: usize) -> Option<T> {
        self.upper[a].as_ref().map(|u| u.clone() - self.flow[a].clone())
    }

    fn add_flow(&mut self, a: usize, amount: &T) {
        let mut v = self.flow[a].clone() + amount.clone();
        if T::MODE == Mode::Float {
            if v.abs() <= self.flow_tol {
                v = T::zero();
            } else if let Some(u) = &self.upper[a] {
                if (v.clone() - u.clone()).abs() <= self.flow_tol {
                    v = u.clone();
                }
            }
        }
        self.flow[a] = v;
    }

    fn join(&self, mut a: usize, mut b: usize) -> usize {
        while a != b {
            if self.depth[a] >= self.depth[b] {
                a = self.parent[a];
            } else {
                b = self.parent[b];
            }
        }
        a
    }
}

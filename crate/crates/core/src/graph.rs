//! On-the-fly construction of the strategy-aware Kripke structure: `⇒`
//! edges between execution states, stuttering adjustments for solution
//! states, proposition labeling, failed-state pruning, and graph export.

use std::collections::{BTreeSet, HashMap, HashSet, VecDeque};
use std::fmt::Write as _;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::engine::{
    cterm, solution_reachable, successors, EngineCtx, ExecState, StratConfig, TransitionLabel,
};
use crate::error::{Error, Result};
use crate::ltl::Guard;
use crate::module::SpecModule;
use crate::rewrite::{one_step_rewrites, reduce_with, Budget};
use crate::strategy::{desugar, StrategyExpr};
use crate::subst::Substitution;
use crate::term::Term;

/// Shared interface of the strategy-controlled and uncontrolled models, as
/// consumed by the emptiness check.
pub trait KripkeGraph {
    fn initial(&self) -> usize;
    fn expand(&mut self, id: usize) -> Result<Vec<(usize, TransitionLabel)>>;
    fn term(&self, id: usize) -> &Term;
    fn labels(&mut self, id: usize, props: &[Term]) -> Result<Arc<BTreeSet<Term>>>;
    fn state_count(&self) -> usize;
    fn module(&self) -> &SpecModule;
}

/// Evaluates `satisfies(subject, prop)` to a boolean through the equations.
pub fn eval_prop(m: &SpecModule, subject: &Term, prop: &Term, budget: &Budget) -> Result<bool> {
    let query = Term::make(
        m,
        m.prelude.op_satisfies,
        vec![subject.clone(), prop.clone()],
    )?;
    let value = reduce_with(m, &query, budget)?;
    if value == m.bool_true() {
        Ok(true)
    } else if value == m.bool_false() {
        Ok(false)
    } else {
        Err(Error::UndefinedProposition(
            prop.to_text(m),
            subject.to_text(m),
    ))
    }
}

/// Proposition-label cache keyed by (term, prop), shared by every state
/// that projects to the same term.
#[derive(Default)]
struct LabelCache {
    by_pair: HashMap<(Term, Term), bool>,
}

impl LabelCache {
    fn labels(
        &mut self,
        m: &SpecModule,
        subject: &Term,
        props: &[Term],
        budget: &Budget,
    ) -> Result<BTreeSet<Term>> {
        let mut out = BTreeSet::new();
        for p in props {
            let key = (subject.clone(), p.clone());
            let value = match self.by_pair.get(&key) {
                Some(v) => *v,
                None => {
                    let v = eval_prop(m, subject, p, budget)?;
                    self.by_pair.insert(key, v);
                    v
                }
            };
            if value {
                out.insert(p.clone());
            }
        }
        Ok(out)
    }
}

struct ModelState {
    exec: Arc<ExecState>,
    flag: u8,
    term: Term,
    succ: Option<Vec<(usize, TransitionLabel)>>,
    labels: Option<Arc<BTreeSet<Term>>>,
}

/// The deduplicated graph of execution states under `⇒`, with solution
/// states given stuttering self-loops: in place when they are deadlocked,
/// through a flagged duplicate when they can also continue.
pub struct ModelGraph<'m> {
    module: &'m SpecModule,
    config: StratConfig,
    states: Vec<ModelState>,
    seen: HashMap<(Arc<ExecState>, u8), usize>,
    initial: usize,
    cache: LabelCache,
}

impl<'m> ModelGraph<'m> {
    pub fn new(
        module: &'m SpecModule,
        config: StratConfig,
        t: &Term,
        strat: &Arc<StrategyExpr>,
    ) -> Result<ModelGraph<'m>> {
        let budget = Budget::new(config.reduce_ceiling);
        let t0 = reduce_with(module, t, &budget)?;
        let start = Arc::new(ExecState::start(t0, desugar(strat)));
        let mut g = ModelGraph {
            module,
            config,
            states: Vec::new(),
            seen: HashMap::new(),
            initial: 0,
            cache: LabelCache::default(),
        };
        g.initial = g.intern(start, 0)?;
        Ok(g)
    }

    fn ctx(&self) -> EngineCtx<'_> {
        EngineCtx {
            module: self.module,
            config: &self.config,
        }
    }

    fn intern(&mut self, exec: Arc<ExecState>, flag: u8) -> Result<usize> {
        if let Some(id) = self.seen.get(&(exec.clone(), flag)) {
            return Ok(*id);
        }
        if self.states.len() >= self.config.state_limit {
            return Err(Error::StateSpaceCeiling(self.config.state_limit));
        }
        let term = cterm(&self.ctx(), &exec)?;
        let id = self.states.len();
        self.states.push(ModelState {
            exec: exec.clone(),
            flag,
            term,
            succ: None,
            labels: None,
        });
        self.seen.insert((exec, flag), id);
        Ok(id)
    }

    /// The canonical key of a state: its execution state and stutter flag.
    pub fn canonical_key(&self, id: usize) -> (Arc<ExecState>, u8) {
        (self.states[id].exec.clone(), self.states[id].flag)
    }

    pub fn exec_state(&self, id: usize) -> &ExecState {
        &self.states[id].exec
    }

    pub fn flag(&self, id: usize) -> u8 {
        self.states[id].flag
    }

    /// Memoized successor edges per Fig.-style case analysis: flagged
    /// duplicates only self-loop; solution states without successors
    /// self-loop in place; continuable solutions gain an edge to their
    /// flagged duplicate.
    pub fn expand_state(&mut self, id: usize) -> Result<Vec<(usize, TransitionLabel)>> {
        if let Some(succ) = &self.states[id].succ {
            return Ok(succ.clone());
        }
        let exec = self.states[id].exec.clone();
        let flag = self.states[id].flag;
        let mut edges: Vec<(usize, TransitionLabel)> = Vec::new();
        if flag == 1 {
            edges.push((id, TransitionLabel::Solution));
        } else {
            let succ = successors(&self.ctx(), &exec)?;
            let in_sol = solution_reachable(&self.ctx(), &exec)?;
            let mut ids = Vec::with_capacity(succ.len());
            for (q, lbl) in succ {
                ids.push((self.intern(q, 0)?, lbl));
            }
            if in_sol {
                if ids.is_empty() {
                    edges.push((id, TransitionLabel::Solution));
                } else {
                    let twin = self.intern(exec, 1)?;
                    edges.extend(ids);
                    edges.push((twin, TransitionLabel::Solution));
                }
            } else {
                edges.extend(ids);
            }
        }
        self.states[id].succ = Some(edges.clone());
        Ok(edges)
    }

    /// Expands every reachable state (breadth-first, stable ids).
    pub fn expand_all(&mut self) -> Result<()> {
        let mut next = 0;
        while next < self.states.len() {
            self.expand_state(next)?;
            next += 1;
        }
        Ok(())
    }

    /// States from which neither a solution self-loop nor any cycle is
    /// reachable are failed; returns the surviving ids. The graph must be
    /// fully expanded.
    pub fn prune_failed(&mut self) -> Result<HashSet<usize>> {
        self.expand_all()?;
        let n = self.states.len();
        let adj: Vec<Vec<usize>> = (0..n)
            .map(|i| {
                self.states[i]
                    .succ
                    .as_ref()
                    .unwrap()
                    .iter()
                    .map(|(j, _)| *j)
                    .collect()
            })
            .collect();
        let on_cycle = states_on_cycles(&adj);
        // Survivors reach some cycle state.
        let mut radj: Vec<Vec<usize>> = vec![Vec::new(); n];
        for (i, succs) in adj.iter().enumerate() {
            for j in succs {
                radj[*j].push(i);
            }
        }
        let mut surviving: HashSet<usize> = HashSet::new();
        let mut queue: VecDeque<usize> = VecDeque::new();
        for (i, is_cyclic) in on_cycle.iter().enumerate() {
            if *is_cyclic {
                surviving.insert(i);
                queue.push_back(i);
            }
        }
        while let Some(i) = queue.pop_front() {
            for j in &radj[i] {
                if surviving.insert(*j) {
                    queue.push_back(*j);
                }
            }
        }
        Ok(surviving)
    }

    pub fn export_dot(&mut self, props: &[Term], pruned: Option<&HashSet<usize>>) -> Result<String> {
        self.expand_all()?;
        let keep = |id: usize| pruned.map_or(true, |s| s.contains(&id));
        let mut out = String::new();
        out.push_str("digraph model {\n");
        let _ = writeln!(out, "  __init [shape=point];");
        if keep(self.initial) {
            let _ = writeln!(out, "  __init -> {};", self.initial);
        }
        for id in 0..self.states.len() {
            if !keep(id) {
                continue;
            }
            let term = self.states[id].term.clone();
            let mut label = term.to_text(self.module);
            if !props.is_empty() {
                let labs = self.labels_of(id, props)?;
                let shown: Vec<String> =
                    labs.iter().map(|p| p.to_text(self.module)).collect();
                let _ = write!(label, "\\n{{{}}}", shown.join(", "));
            }
            let style = if self.states[id].flag == 1 {
                ", style=dashed"
            } else {
                ""
            };
            let _ = writeln!(out, "  {} [label=\"{}\"{}];", id, escape(&label), style);
        }
        for id in 0..self.states.len() {
            if !keep(id) {
                continue;
            }
            for (j, lbl) in self.states[id].succ.clone().unwrap() {
                if !keep(j) {
                    continue;
                }
                let _ = writeln!(out, "  {} -> {} [label=\"{}\"];", id, j, lbl);
            }
        }
        out.push_str("}\n");
        Ok(out)
    }

    pub fn export_json(
        &mut self,
        props: &[Term],
        pruned: Option<&HashSet<usize>>,
    ) -> Result<GraphExport> {
        self.expand_all()?;
        let keep = |id: usize| pruned.map_or(true, |s| s.contains(&id));
        let mut states = Vec::new();
        let mut edges = Vec::new();
        for id in 0..self.states.len() {
            if !keep(id) {
                continue;
            }
            let labels = if props.is_empty() {
                Vec::new()
            } else {
                self.labels_of(id, props)?
                    .iter()
                    .map(|p| p.to_text(self.module))
                    .collect()
            };
            states.push(GraphStateExport {
                id,
                term: self.states[id].term.to_text(self.module),
                flag: self.states[id].flag,
                labels,
            });
            for (j, lbl) in self.states[id].succ.clone().unwrap() {
                if keep(j) {
                    edges.push(GraphEdgeExport {
                        from: id,
                        to: j,
                        label: lbl.to_string(),
                    });
                }
            }
        }
        Ok(GraphExport {
            states,
            edges,
            initial: self.initial,
        })
    }

    fn labels_of(&mut self, id: usize, props: &[Term]) -> Result<Arc<BTreeSet<Term>>> {
        if let Some(l) = &self.states[id].labels {
            return Ok(l.clone());
        }
        let budget = Budget::new(self.config.reduce_ceiling);
        let term = self.states[id].term.clone();
        let set = Arc::new(self.cache.labels(self.module, &term, props, &budget)?);
        self.states[id].labels = Some(set.clone());
        Ok(set)
    }
}

fn escape(s: &str) -> String {
    s.replace('"', "\\\"")
}

/// States lying on some cycle (including self-loops), via Tarjan's
/// strongly connected components.
fn states_on_cycles(adj: &[Vec<usize>]) -> Vec<bool> {
    let n = adj.len();
    let mut index = vec![usize::MAX; n];
    let mut low = vec![0usize; n];
    let mut on_stack = vec![false; n];
    let mut stack: Vec<usize> = Vec::new();
    let mut next_index = 0;
    let mut result = vec![false; n];

    // Iterative Tarjan.
    enum Phase {
        Enter(usize),
        Resume(usize, usize),
    }
    for root in 0..n {
        if index[root] != usize::MAX {
            continue;
        }
        let mut work = vec![Phase::Enter(root)];
        while let Some(phase) = work.pop() {
            match phase {
                Phase::Enter(v) => {
                    index[v] = next_index;
                    low[v] = next_index;
                    next_index += 1;
                    stack.push(v);
                    on_stack[v] = true;
                    work.push(Phase::Resume(v, 0));
                }
                Phase::Resume(v, mut i) => {
                    let mut descend = None;
                    while i < adj[v].len() {
                        let w = adj[v][i];
                        i += 1;
                        if index[w] == usize::MAX {
                            descend = Some(w);
                            break;
                        } else if on_stack[w] {
                            low[v] = low[v].min(index[w]);
                        }
                    }
                    match descend {
                        Some(w) => {
                            work.push(Phase::Resume(v, i));
                            work.push(Phase::Enter(w));
                        }
                        None => {
                            if low[v] == index[v] {
                                // Root of an SCC; pop it.
                                let mut comp = Vec::new();
                                loop {
                                    let w = stack.pop().unwrap();
                                    on_stack[w] = false;
                                    comp.push(w);
                                    if w == v {
                                        break;
                                    }
                                }
                                let cyclic = comp.len() > 1
                                    || adj[comp[0]].contains(&comp[0]);
                                if cyclic {
                                    for w in comp {
                                        result[w] = true;
                                    }
                                }
                            }
                            // Propagate lowlink to the parent frame.
                            if let Some(Phase::Resume(p, _)) = work.last() {
                                let p = *p;
                                low[p] = low[p].min(low[v]);
                            }
                        }
                    }
                }
            }
        }
    }
    result
}

impl KripkeGraph for ModelGraph<'_> {
    fn initial(&self) -> usize {
        self.initial
    }
    fn expand(&mut self, id: usize) -> Result<Vec<(usize, TransitionLabel)>> {
        self.expand_state(id)
    }
    fn term(&self, id: usize) -> &Term {
        &self.states[id].term
    }
    fn labels(&mut self, id: usize, props: &[Term]) -> Result<Arc<BTreeSet<Term>>> {
        self.labels_of(id, props)
    }
    fn state_count(&self) -> usize {
        self.states.len()
    }
    fn module(&self) -> &SpecModule {
        self.module
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
pub struct GraphExport {
    pub states: Vec<GraphStateExport>,
    pub edges: Vec<GraphEdgeExport>,
    pub initial: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
pub struct GraphStateExport {
    pub id: usize,
    pub term: String,
    pub flag: u8,
    pub labels: Vec<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
pub struct GraphEdgeExport {
    pub from: usize,
    pub to: usize,
    pub label: String,
}

/// The uncontrolled model: terms under one-step rule rewriting, with
/// deadlock states closed by a stuttering self-loop.
pub struct UncontrolledGraph<'m> {
    module: &'m SpecModule,
    config: StratConfig,
    terms: Vec<Term>,
    succ: Vec<Option<Vec<(usize, TransitionLabel)>>>,
    labels: Vec<Option<Arc<BTreeSet<Term>>>>,
    seen: HashMap<Term, usize>,
    cache: LabelCache,
}

impl<'m> UncontrolledGraph<'m> {
    pub fn new(module: &'m SpecModule, config: StratConfig, t: &Term) -> Result<UncontrolledGraph<'m>> {
        let budget = Budget::new(config.reduce_ceiling);
        let t0 = reduce_with(module, t, &budget)?;
        let mut g = UncontrolledGraph {
            module,
            config,
            terms: Vec::new(),
            succ: Vec::new(),
            labels: Vec::new(),
            seen: HashMap::new(),
            cache: LabelCache::default(),
        };
        g.intern(t0)?;
        Ok(g)
    }

    fn intern(&mut self, t: Term) -> Result<usize> {
        if let Some(id) = self.seen.get(&t) {
            return Ok(*id);
        }
        if self.terms.len() >= self.config.state_limit {
            return Err(Error::StateSpaceCeiling(self.config.state_limit));
        }
        let id = self.terms.len();
        self.terms.push(t.clone());
        self.succ.push(None);
        self.labels.push(None);
        self.seen.insert(t, id);
        Ok(id)
    }

    /// Every reachable term, by breadth-first closure.
    pub fn reachable_terms(&mut self) -> Result<Vec<Term>> {
        let mut next = 0;
        while next < self.terms.len() {
            self.expand(next)?;
            next += 1;
        }
        Ok(self.terms.clone())
    }

    /// Deadlocked normal forms: states whose only edge is the self-loop.
    pub fn deadlocks(&mut self) -> Result<Vec<Term>> {
        let mut out = Vec::new();
        let mut next = 0;
        while next < self.terms.len() {
            let succ = self.expand(next)?;
            if succ.len() == 1 && succ[0].0 == next {
                out.push(self.terms[next].clone());
            }
            next += 1;
        }
        Ok(out)
    }
}

impl KripkeGraph for UncontrolledGraph<'_> {
    fn initial(&self) -> usize {
        0
    }
    fn expand(&mut self, id: usize) -> Result<Vec<(usize, TransitionLabel)>> {
        if let Some(s) = &self.succ[id] {
            return Ok(s.clone());
        }
        let budget = Budget::new(self.config.reduce_ceiling);
        let t = self.terms[id].clone();
        let rewrites = one_step_rewrites(self.module, &t, &budget)?;
        let mut edges = Vec::with_capacity(rewrites.len().max(1));
        for (next, label) in rewrites {
            let j = self.intern(next)?;
            edges.push((j, TransitionLabel::Rule(label)));
        }
        if edges.is_empty() {
            edges.push((id, TransitionLabel::Solution));
        }
        self.succ[id] = Some(edges.clone());
        Ok(edges)
    }
    fn term(&self, id: usize) -> &Term {
        &self.terms[id]
    }
    fn labels(&mut self, id: usize, props: &[Term]) -> Result<Arc<BTreeSet<Term>>> {
        if let Some(l) = &self.labels[id] {
            return Ok(l.clone());
        }
        let budget = Budget::new(self.config.reduce_ceiling);
        let t = self.terms[id].clone();
        let set = Arc::new(self.cache.labels(self.module, &t, props, &budget)?);
        self.labels[id] = Some(set.clone());
        Ok(set)
    }
    fn state_count(&self) -> usize {
        self.terms.len()
    }
    fn module(&self) -> &SpecModule {
        self.module
    }
}

/// A guard is satisfied by a state when its labels satisfy it; convenience
/// for building products over either graph kind.
pub fn guard_holds(guard: &Guard, labels: &BTreeSet<Term>) -> bool {
    guard.satisfied(labels)
}

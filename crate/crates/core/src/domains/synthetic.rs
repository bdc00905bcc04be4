//! Seeded random trees: states are nodes of a complete `branching`-ary tree,
//! actions pick a child, and a state is valid only if it strictly improves
//! on its parent's satisfaction.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::engine::{
    ActionId, ActionSpec, Catalog, DomainError, MeasureSetId, MeasureSetSpec, ProblemDomain,
    Satisfaction,
};
use crate::trace::Problem;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SyntheticParams {
    pub seed: u64,
    pub branching: usize,
    pub depth: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticProblem {
    pub params: SyntheticParams,
    /// One satisfaction per node, breadth-first order.
    pub satisfactions: Vec<f64>,
}

pub fn node_count(branching: usize, depth: usize) -> usize {
    (0..=depth).map(|l| branching.pow(l as u32)).sum()
}

impl SyntheticProblem {
    /// Satisfactions drawn uniformly from `{1.0, 1.1, ..., 10.0}`.
    pub fn generate(params: SyntheticParams) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
        let satisfactions = (0..node_count(params.branching, params.depth))
            .map(|_| rng.gen_range(10..=100) as f64 / 10.0)
            .collect();
        SyntheticProblem {
            params,
            satisfactions,
        }
    }

    pub fn with_satisfactions(branching: usize, depth: usize, satisfactions: Vec<f64>) -> Self {
        SyntheticProblem {
            params: SyntheticParams {
                seed: 0,
                branching,
                depth,
            },
            satisfactions,
        }
    }
}

impl Problem for SyntheticProblem {
    type Domain = SyntheticDomain;

    fn build(&self) -> Result<(SyntheticDomain, usize), DomainError> {
        Ok((SyntheticDomain::new(self.clone())?, 0))
    }
}

pub fn synthetic_catalog(branching: usize) -> Catalog {
    Catalog {
        actions: (0..branching)
            .map(|k| ActionSpec {
                name: format!("CHILD_{k}"),
                measure_set: 0,
            })
            .collect(),
        measure_sets: vec![MeasureSetSpec {
            name: "node".into(),
            measures: vec!["parent_sat".into(), "child_parity".into(), "depth".into()],
        }],
    }
}

#[derive(Debug, Clone)]
pub struct SyntheticDomain {
    problem: SyntheticProblem,
    depths: Vec<usize>,
    catalog: Catalog,
}

impl SyntheticDomain {
    pub fn new(problem: SyntheticProblem) -> Result<Self, DomainError> {
        let SyntheticParams {
            branching, depth, ..
        } = problem.params;
        if branching == 0 {
            return Err(DomainError("branching factor must be at least 1".into()));
        }
        let n = node_count(branching, depth);
        if problem.satisfactions.len() != n {
            return Err(DomainError(format!(
                "{} satisfactions for a tree of {n} nodes",
                problem.satisfactions.len()
            )));
        }
        let mut depths = vec![0; n];
        for i in 1..n {
            depths[i] = depths[(i - 1) / branching] + 1;
        }
        Ok(SyntheticDomain {
            catalog: synthetic_catalog(branching),
            problem,
            depths,
        })
    }

    fn parent(&self, node: usize) -> Option<usize> {
        (node > 0).then(|| (node - 1) / self.problem.params.branching)
    }
}

impl ProblemDomain for SyntheticDomain {
    type State = usize;
    type Key = usize;

    fn domain_id(&self) -> &str {
        "synthetic"
    }

    fn catalog(&self) -> &Catalog {
        &self.catalog
    }

    fn satisfaction(&self, node: &usize) -> Result<Satisfaction, DomainError> {
        let value = *self
            .problem
            .satisfactions
            .get(*node)
            .ok_or_else(|| DomainError(format!("no node {node}")))?;
        Satisfaction::new(value)
    }

    fn measures(&self, node: &usize, set: MeasureSetId) -> Result<Vec<f64>, DomainError> {
        if set != 0 {
            return Err(DomainError(format!("unknown measure set {set}")));
        }
        let sats = &self.problem.satisfactions;
        let parent_sat = sats[self.parent(*node).unwrap_or(*node)];
        let parity = match *node {
            0 => 0,
            n => ((n - 1) % self.problem.params.branching) % 2,
        };
        Ok(vec![parent_sat, parity as f64, self.depths[*node] as f64])
    }

    fn apply(&self, node: &usize, action: ActionId) -> Result<usize, DomainError> {
        let b = self.problem.params.branching;
        if action >= b || self.is_terminal(node) {
            return Err(DomainError(format!(
                "action {action} not applicable at node {node}"
            )));
        }
        Ok(node * b + 1 + action)
    }

    fn state_key(&self, node: &usize) -> usize {
        *node
    }

    fn is_valid(
        &self,
        _: &usize,
        satisfaction: Satisfaction,
        parent: Option<(&usize, Satisfaction)>,
    ) -> bool {
        parent.is_none_or(|(_, ps)| satisfaction.value() > ps.value())
    }

    fn is_terminal(&self, node: &usize) -> bool {
        self.depths[*node] == self.problem.params.depth
    }
}

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NodeRole {
    /// Boundary condition supplied from outside the model.
    Forcing,
    /// Markov state carried between steps.
    State,
    /// Diagnostic output computed from the state.
    Output,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Node {
    pub name: String,
    pub role: NodeRole,
}

/// Directed network of phenomenological variables. An edge means the
/// source's value during one time step informs the target's value at the
/// next.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NetworkSpec {
    nodes: Vec<Node>,
    edges: Vec<(usize, usize)>,
}

impl NetworkSpec {
    /// Builds a network from named edges. Self-loops are not edges: every
    /// state node implicitly depends on its own previous value.
    pub fn new(nodes: Vec<Node>, edges: &[(&str, &str)]) -> Result<Self> {
        let index = |name: &str| {
            nodes
                .iter()
                .position(|n| n.name == name)
                .ok_or_else(|| Error::invalid(format!("edge endpoint {name:?} is not a node")))
        };
        let mut idx_edges = Vec::with_capacity(edges.len());
        for &(s, t) in edges {
            let (s, t) = (index(s)?, index(t)?);
            if s == t {
                return Err(Error::invalid(format!("self-loop on {}", nodes[s].name)));
            }
            if nodes[t].role == NodeRole::Forcing {
                return Err(Error::invalid(format!(
                    "forcing node {} cannot have parents",
                    nodes[t].name
                )));
            }
            if !idx_edges.contains(&(s, t)) {
                idx_edges.push((s, t));
            }
        }
        let spec = Self {
            nodes,
            edges: idx_edges,
        };
        if !spec.is_acyclic() {
            return Err(Error::invalid("network contains a directed cycle"));
        }
        Ok(spec)
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn node_names(&self) -> Vec<String> {
        self.nodes.iter().map(|n| n.name.clone()).collect()
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn edge_names(&self) -> Vec<(String, String)> {
        self.edges
            .iter()
            .map(|&(s, t)| (self.nodes[s].name.clone(), self.nodes[t].name.clone()))
            .collect()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.nodes.iter().position(|n| n.name == name)
    }

    pub fn has_edge(&self, source: &str, target: &str) -> bool {
        match (self.index_of(source), self.index_of(target)) {
            (Some(s), Some(t)) => self.edges.contains(&(s, t)),
            _ => false,
        }
    }

    pub fn parents(&self, node: usize) -> Vec<usize> {
        self.edges
            .iter()
            .filter(|&&(_, t)| t == node)
            .map(|&(s, _)| s)
            .collect()
    }

    /// Kahn's algorithm.
    fn is_acyclic(&self) -> bool {
        let n = self.nodes.len();
        let mut indegree = vec![0usize; n];
        for &(_, t) in &self.edges {
            indegree[t] += 1;
        }
        let mut ready: Vec<usize> = (0..n).filter(|&i| indegree[i] == 0).collect();
        let mut seen = 0;
        while let Some(v) = ready.pop() {
            seen += 1;
            for &(s, t) in &self.edges {
                if s == v {
                    indegree[t] -= 1;
                    if indegree[t] == 0 {
                        ready.push(t);
                    }
                }
            }
        }
        seen == n
    }
}

pub const PRECIP: &str = "u^p";
pub const PET: &str = "u^e";
pub const SOIL: &str = "x_s";
pub const STREAMFLOW: &str = "y^q";

pub fn quick_tank(i: usize) -> String {
    format!("x^q_{}", i + 1)
}

pub fn slow_tank(i: usize) -> String {
    format!("x^s_{}", i + 1)
}

/// HyMod's one-step dataflow: forcings drive the soil store and effective
/// rainfall, effective rainfall feeds the first quick and slow tanks, tanks
/// drain down their cascades, and the last tanks produce streamflow.
///
/// Node order is forcings, soil, quick tanks, slow tanks, streamflow.
pub fn build_hymod_network(n_quick: usize, n_slow: usize) -> Result<NetworkSpec> {
    if n_quick == 0 || n_slow == 0 {
        return Err(Error::invalid("hymod network needs quick and slow tanks"));
    }
    let quick: Vec<String> = (0..n_quick).map(quick_tank).collect();
    let slow: Vec<String> = (0..n_slow).map(slow_tank).collect();

    let mut nodes = vec![
        Node {
            name: PRECIP.into(),
            role: NodeRole::Forcing,
        },
        Node {
            name: PET.into(),
            role: NodeRole::Forcing,
        },
        Node {
            name: SOIL.into(),
            role: NodeRole::State,
        },
    ];
    for name in quick.iter().chain(&slow) {
        nodes.push(Node {
            name: name.clone(),
            role: NodeRole::State,
        });
    }
    nodes.push(Node {
        name: STREAMFLOW.into(),
        role: NodeRole::Output,
    });

    let mut edges: Vec<(&str, &str)> = vec![
        (PRECIP, SOIL),
        (PET, SOIL),
        (SOIL, &quick[0]),
        (PRECIP, &quick[0]),
        (SOIL, &slow[0]),
        (PRECIP, &slow[0]),
    ];
    for cascade in [&quick, &slow] {
        for w in cascade.windows(2) {
            edges.push((&w[0], &w[1]));
        }
    }
    edges.push((&quick[n_quick - 1], STREAMFLOW));
    edges.push((&slow[n_slow - 1], STREAMFLOW));
    NetworkSpec::new(nodes, &edges)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hymod_topology() {
        let net = build_hymod_network(3, 3).unwrap();
        assert_eq!(net.nodes().len(), 10);
        assert!(net.has_edge(PRECIP, SOIL));
        assert!(net.has_edge(SOIL, "x^q_1"));
        assert!(net.has_edge(SOIL, "x^s_1"));
        assert!(net.has_edge("x^q_3", STREAMFLOW));
        assert!(!net.has_edge(STREAMFLOW, PRECIP));
        assert_eq!(
            net.parents(net.index_of("x^q_2").unwrap()),
            vec![net.index_of("x^q_1").unwrap()]
        );
    }

    #[test]
    fn rejects_cycles_and_unknown_nodes() {
        let node = |n: &str| Node {
            name: n.into(),
            role: NodeRole::State,
        };
        let nodes = vec![node("a"), node("b"), node("c")];
        assert!(NetworkSpec::new(nodes.clone(), &[("a", "b"), ("b", "c"), ("c", "a")]).is_err());
        assert!(NetworkSpec::new(nodes.clone(), &[("a", "d")]).is_err());
        assert!(NetworkSpec::new(nodes.clone(), &[("a", "a")]).is_err());
        assert!(NetworkSpec::new(nodes, &[("a", "b"), ("a", "c")]).is_ok());
    }
}

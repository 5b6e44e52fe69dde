//! Binary quadratic forms and the program graphs they define.
//!
//! A form `sum_i a_i x_i + sum_(i,j) b_ij x_i x_j` with every coefficient in
//! `{0,1}` is read as a weighted adjacency matrix: variables that appear in
//! some active term become vertices, active quadratic terms become edges.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Graph;

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct QuadraticForm {
    num_vars: usize,
    linear: BTreeSet<usize>,
    quadratic: BTreeSet<(usize, usize)>,
}

#[derive(Serialize, Deserialize)]
struct QuadraticFormJson {
    n: usize,
    #[serde(default)]
    linear: Vec<usize>,
    #[serde(default)]
    quadratic: Vec<[usize; 2]>,
}

impl QuadraticForm {
    /// `linear` lists the variables with coefficient 1, `quadratic` the
    /// unordered pairs with coefficient 1; everything else is 0.
    pub fn new(
        num_vars: usize,
        linear: impl IntoIterator<Item = usize>,
        quadratic: impl IntoIterator<Item = (usize, usize)>,
    ) -> Result<Self> {
        let in_range = |v: usize| {
            if v < num_vars {
                Ok(v)
            } else {
                Err(Error::VertexOutOfRange { vertex: v, n: num_vars })
            }
        };
        let linear = linear.into_iter().map(in_range).collect::<Result<_>>()?;
        let quadratic = quadratic
            .into_iter()
            .map(|(i, j)| {
                in_range(i)?;
                in_range(j)?;
                if i == j {
                    return Err(Error::RepeatedVariable(format!("x{i}*x{j}")));
                }
                Ok((i.min(j), i.max(j)))
            })
            .collect::<Result<_>>()?;
        Ok(QuadraticForm { num_vars, linear, quadratic })
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn linear(&self) -> &BTreeSet<usize> {
        &self.linear
    }

    pub fn quadratic(&self) -> &BTreeSet<(usize, usize)> {
        &self.quadratic
    }

    pub fn linear_coefficient(&self, i: usize) -> u8 {
        self.linear.contains(&i) as u8
    }

    pub fn quadratic_coefficient(&self, i: usize, j: usize) -> u8 {
        self.quadratic.contains(&(i.min(j), i.max(j))) as u8
    }

    /// Parses `x1*x2 + x2*x3 + x0`. A term may carry an explicit `0*` or
    /// `1*` prefix; a `0*` term declares its variables without activating it.
    pub fn parse(text: &str) -> Result<Self> {
        let text = text.trim();
        let mut num_vars = 0;
        let mut linear = Vec::new();
        let mut quadratic = Vec::new();
        if text.is_empty() {
            return Ok(QuadraticForm::default());
        }
        for raw in text.split('+') {
            let term = raw.trim();
            let mut coefficient = None;
            let mut vars = Vec::new();
            for factor in term.split('*').map(str::trim) {
                if let Some(index) = factor.strip_prefix(['x', 'X']) {
                    let i = index
                        .parse::<usize>()
                        .map_err(|_| Error::MalformedTerm(term.to_string()))?;
                    vars.push(i);
                } else if let Ok(c) = factor.parse::<f64>() {
                    if coefficient.is_some() || !vars.is_empty() {
                        return Err(Error::MalformedTerm(term.to_string()));
                    }
                    if c != 0.0 && c != 1.0 {
                        return Err(Error::CoefficientOutOfRange(factor.to_string()));
                    }
                    coefficient = Some(c == 1.0);
                } else {
                    return Err(Error::MalformedTerm(term.to_string()));
                }
            }
            let active = coefficient.unwrap_or(true);
            match vars[..] {
                [i] => {
                    if active {
                        linear.push(i);
                    }
                    num_vars = num_vars.max(i + 1);
                }
                [i, j] if i == j => return Err(Error::RepeatedVariable(term.to_string())),
                [i, j] => {
                    if active {
                        quadratic.push((i, j));
                    }
                    num_vars = num_vars.max(i.max(j) + 1);
                }
                _ => return Err(Error::MalformedTerm(term.to_string())),
            }
        }
        QuadraticForm::new(num_vars, linear, quadratic)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let raw: QuadraticFormJson = serde_json::from_str(text)?;
        QuadraticForm::new(raw.n, raw.linear, raw.quadratic.into_iter().map(|[i, j]| (i, j)))
    }

    pub fn to_json(&self) -> String {
        let raw = QuadraticFormJson {
            n: self.num_vars,
            linear: self.linear.iter().copied().collect(),
            quadratic: self.quadratic.iter().map(|&(i, j)| [i, j]).collect(),
        };
        serde_json::to_string(&raw).expect("plain data serializes")
    }

    /// Builds the program graph over the variables in use, re-indexed
    /// densely in ascending variable order.
    pub fn to_program_graph(&self) -> Result<ProgramGraph> {
        let used: BTreeSet<usize> = self
            .linear
            .iter()
            .copied()
            .chain(self.quadratic.iter().flat_map(|&(i, j)| [i, j]))
            .collect();
        if used.is_empty() {
            return Err(Error::EmptyProgramGraph);
        }
        let variables: Vec<usize> = used.into_iter().collect();
        let index: BTreeMap<usize, usize> = variables.iter().enumerate().map(|(k, &v)| (v, k)).collect();
        let graph = Graph::new(
            variables.len(),
            self.quadratic.iter().map(|(i, j)| (index[i], index[j])),
        )?;
        let linear = variables.iter().map(|v| self.linear.contains(v)).collect();
        Ok(ProgramGraph {
            graph,
            variables,
            linear,
            num_vars: self.num_vars,
        })
    }
}

impl fmt::Display for QuadraticForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let terms = self
            .linear
            .iter()
            .map(|i| format!("x{i}"))
            .chain(self.quadratic.iter().map(|(i, j)| format!("x{i}*x{j}")));
        let mut first = true;
        for t in terms {
            if !first {
                f.write_str(" + ")?;
            }
            f.write_str(&t)?;
            first = false;
        }
        Ok(())
    }
}

/// A program graph together with the variable each vertex stands for.
#[derive(Debug, Clone, PartialEq)]
pub struct ProgramGraph {
    pub graph: Graph,
    /// `variables[v]` is the form variable behind vertex `v`.
    pub variables: Vec<usize>,
    /// Whether the linear coefficient of vertex `v`'s variable is 1.
    pub linear: Vec<bool>,
    pub num_vars: usize,
}

impl ProgramGraph {
    pub fn vertex_of(&self, variable: usize) -> Option<usize> {
        self.variables.binary_search(&variable).ok()
    }

    /// Regenerates the quadratic form in the original variable numbering.
    pub fn to_quadratic_form(&self) -> QuadraticForm {
        QuadraticForm::new(
            self.num_vars,
            self.variables
                .iter()
                .zip(&self.linear)
                .filter(|(_, &on)| on)
                .map(|(&v, _)| v),
            self.graph
                .edges()
                .iter()
                .map(|&(u, v)| (self.variables[u], self.variables[v])),
        )
        .expect("indices come from a valid form")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn parses_chain_of_couplings() {
        let qf = QuadraticForm::parse("x1*x2 + x2*x3").unwrap();
        assert_eq!(qf.quadratic_coefficient(1, 2), 1);
        assert_eq!(qf.quadratic_coefficient(3, 2), 1);
        assert_eq!(qf.quadratic_coefficient(1, 3), 0);
        assert!(qf.linear().is_empty());
        assert_eq!(qf.num_vars(), 4);
    }

    #[test]
    fn parses_linear_term() {
        let qf = QuadraticForm::parse("x0").unwrap();
        assert_eq!(qf.linear_coefficient(0), 1);
        assert!(qf.quadratic().is_empty());
    }

    #[test]
    fn coefficient_prefixes() {
        let qf = QuadraticForm::parse("1*x0*x1 + 0*x2 + 0*x1*x2").unwrap();
        assert_eq!(qf.quadratic_coefficient(0, 1), 1);
        assert_eq!(qf.linear_coefficient(2), 0);
        assert_eq!(qf.quadratic_coefficient(1, 2), 0);
        assert_eq!(qf.num_vars(), 3);
    }

    #[test]
    fn rejects_bad_terms() {
        assert!(matches!(QuadraticForm::parse("2*x0*x1"), Err(Error::CoefficientOutOfRange(_))));
        assert!(matches!(QuadraticForm::parse("0.5*x0"), Err(Error::CoefficientOutOfRange(_))));
        assert!(matches!(QuadraticForm::parse("x1*x1"), Err(Error::RepeatedVariable(_))));
        assert!(matches!(QuadraticForm::parse("y1"), Err(Error::MalformedTerm(_))));
        assert!(matches!(QuadraticForm::parse("x1 + "), Err(Error::MalformedTerm(_))));
        assert!(matches!(QuadraticForm::parse("x1*x2*x3"), Err(Error::MalformedTerm(_))));
        assert!(matches!(QuadraticForm::parse("x1*1"), Err(Error::MalformedTerm(_))));
        assert!(matches!(QuadraticForm::parse("xa"), Err(Error::MalformedTerm(_))));
    }

    #[test]
    fn program_graph_path() {
        let pg = QuadraticForm::parse("x1*x2 + x2*x3").unwrap().to_program_graph().unwrap();
        assert_eq!(pg.graph.num_vertices(), 3);
        assert_eq!(pg.graph.edges(), &[(0, 1), (1, 2)]);
        assert_eq!(pg.variables, vec![1, 2, 3]);
        assert_eq!(pg.vertex_of(3), Some(2));
        assert_eq!(pg.vertex_of(0), None);
    }

    #[test]
    fn program_graph_isolated_vertex() {
        let pg = QuadraticForm::parse("x5").unwrap().to_program_graph().unwrap();
        assert_eq!(pg.graph.num_vertices(), 1);
        assert_eq!(pg.graph.num_edges(), 0);
        assert_eq!(pg.variables, vec![5]);
    }

    #[test]
    fn program_graph_triangle() {
        let pg = QuadraticForm::parse("x0*x1 + x1*x2 + x0*x2").unwrap().to_program_graph().unwrap();
        assert_eq!(pg.graph.num_edges(), 3);
        assert_eq!(pg.graph.num_vertices(), 3);
    }

    #[test]
    fn empty_form_has_no_graph() {
        assert_eq!(QuadraticForm::parse("").unwrap().to_program_graph(), Err(Error::EmptyProgramGraph));
        assert_eq!(QuadraticForm::parse("0*x3").unwrap().to_program_graph(), Err(Error::EmptyProgramGraph));
    }

    #[test]
    fn json_form() {
        let qf = QuadraticForm::from_json(r#"{"n": 4, "linear": [0], "quadratic": [[1,2],[3,2]]}"#).unwrap();
        assert_eq!(qf, QuadraticForm::parse("x0 + x1*x2 + x2*x3").unwrap());
        assert_eq!(QuadraticForm::from_json(&qf.to_json()).unwrap(), qf);
        assert!(QuadraticForm::from_json(r#"{"n": 2, "quadratic": [[1,1]]}"#).is_err());
        assert!(QuadraticForm::from_json(r#"{"n": 2, "linear": [2]}"#).is_err());
    }

    fn form() -> impl Strategy<Value = QuadraticForm> {
        (1usize..10).prop_flat_map(|n| {
            (
                proptest::collection::btree_set(0..n, 0..n),
                proptest::collection::btree_set((0..n, 0..n), 0..12),
            )
                .prop_map(move |(lin, quad)| {
                    QuadraticForm::new(n, lin, quad.into_iter().filter(|(i, j)| i != j)).unwrap()
                })
        })
    }

    proptest! {
        #[test]
        fn program_graph_regenerates_form(qf in form()) {
            match qf.to_program_graph() {
                Ok(pg) => {
                    prop_assert_eq!(pg.graph.num_edges(), qf.quadratic().len());
                    let back = pg.to_quadratic_form();
                    prop_assert_eq!(back.linear(), qf.linear());
                    prop_assert_eq!(back.quadratic(), qf.quadratic());
                }
                Err(e) => {
                    prop_assert_eq!(e, Error::EmptyProgramGraph);
                    prop_assert!(qf.linear().is_empty() && qf.quadratic().is_empty());
                }
            }
        }

        #[test]
        fn display_parses_back(qf in form()) {
            let text = qf.to_string();
            let back = QuadraticForm::parse(&text).unwrap();
            prop_assert_eq!(back.linear(), qf.linear());
            prop_assert_eq!(back.quadratic(), qf.quadratic());
        }
    }
}

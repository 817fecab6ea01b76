use std::collections::HashMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::Serialize;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Gate {
    Var(usize),
    Const(BigRational),
    Sum(Vec<usize>),
    Product(Vec<usize>),
}

/// Arithmetic circuit over the rationals. Gates are stored in topological
/// order: every child index is smaller than its parent's. Sum and product
/// gates always have at least two children.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ArithCircuit {
    gates: Vec<Gate>,
    output: usize,
}

/// Builds circuits with shared leaves and no unary operations.
#[derive(Debug, Default)]
pub struct CircuitBuilder {
    gates: Vec<Gate>,
    vars: HashMap<usize, usize>,
    consts: HashMap<BigRational, usize>,
}

impl CircuitBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn var(&mut self, index: usize) -> usize {
        if let Some(&g) = self.vars.get(&index) {
            return g;
        }
        let g = self.push(Gate::Var(index));
        self.vars.insert(index, g);
        g
    }

    pub fn constant(&mut self, value: BigRational) -> usize {
        if let Some(&g) = self.consts.get(&value) {
            return g;
        }
        let g = self.push(Gate::Const(value.clone()));
        self.consts.insert(value, g);
        g
    }

    pub fn int(&mut self, value: i64) -> usize {
        self.constant(BigRational::from_integer(BigInt::from(value)))
    }

    /// Empty sums are 0 and single-term sums are the term itself.
    pub fn sum(&mut self, children: Vec<usize>) -> usize {
        match children.len() {
            0 => self.int(0),
            1 => children[0],
            _ => self.push(Gate::Sum(children)),
        }
    }

    /// Empty products are 1 and single-factor products are the factor itself.
    pub fn product(&mut self, children: Vec<usize>) -> usize {
        match children.len() {
            0 => self.int(1),
            1 => children[0],
            _ => self.push(Gate::Product(children)),
        }
    }

    /// `1 - g`.
    pub fn one_minus(&mut self, g: usize) -> usize {
        let one = self.int(1);
        let minus = self.int(-1);
        let neg = self.product(vec![minus, g]);
        self.sum(vec![one, neg])
    }

    pub fn finish(self, output: usize) -> ArithCircuit {
        ArithCircuit { gates: self.gates, output }
    }

    fn push(&mut self, gate: Gate) -> usize {
        self.gates.push(gate);
        self.gates.len() - 1
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct GateDoc {
    pub id: usize,
    pub kind: &'static str,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub children: Vec<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub var: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub value: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct CircuitDoc {
    pub gates: Vec<GateDoc>,
    pub output: usize,
}

impl ArithCircuit {
    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn output(&self) -> usize {
        self.output
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    /// One more than the largest variable index used.
    pub fn var_count(&self) -> usize {
        self.gates
            .iter()
            .filter_map(|g| match g {
                Gate::Var(i) => Some(i + 1),
                _ => None,
            })
            .max()
            .unwrap_or(0)
    }

    /// Exact evaluation at a rational point.
    pub fn eval(&self, point: &[BigRational]) -> BigRational {
        let mut values: Vec<BigRational> = Vec::with_capacity(self.gates.len());
        for gate in &self.gates {
            let v = match gate {
                Gate::Var(i) => point[*i].clone(),
                Gate::Const(c) => c.clone(),
                Gate::Sum(cs) => cs.iter().fold(BigRational::zero(), |acc, &c| acc + &values[c]),
                Gate::Product(cs) => cs.iter().fold(BigRational::one(), |acc, &c| acc * &values[c]),
            };
            values.push(v);
        }
        values.swap_remove(self.output)
    }

    /// Structural checks: topological storage, arity, and a single sink
    /// at the output.
    pub fn check(&self) -> Result<(), String> {
        let mut used = vec![false; self.gates.len()];
        for (id, gate) in self.gates.iter().enumerate() {
            if let Gate::Sum(cs) | Gate::Product(cs) = gate {
                if cs.len() < 2 {
                    return Err(format!("gate {id} has in-degree {}", cs.len()));
                }
                for &c in cs {
                    if c >= id {
                        return Err(format!("gate {id} reads later gate {c}"));
                    }
                    used[c] = true;
                }
            }
        }
        if self.output >= self.gates.len() || used[self.output] {
            return Err("output gate is missing or has outgoing edges".into());
        }
        Ok(())
    }

    /// Gate list with rationals as `num/den` strings.
    pub fn to_doc(&self) -> CircuitDoc {
        let gates = self
            .gates
            .iter()
            .enumerate()
            .map(|(id, g)| match g {
                Gate::Var(i) => GateDoc { id, kind: "var", children: vec![], var: Some(*i), value: None },
                Gate::Const(c) => GateDoc {
                    id,
                    kind: "const",
                    children: vec![],
                    var: None,
                    value: Some(format!("{}/{}", c.numer(), c.denom())),
                },
                Gate::Sum(cs) => GateDoc { id, kind: "sum", children: cs.clone(), var: None, value: None },
                Gate::Product(cs) => GateDoc { id, kind: "product", children: cs.clone(), var: None, value: None },
            })
            .collect();
        CircuitDoc { gates, output: self.output }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn x_squared_plus_one() {
        let mut b = CircuitBuilder::new();
        let x = b.var(0);
        let sq = b.product(vec![x, x]);
        let one = b.int(1);
        let out = b.sum(vec![sq, one]);
        let c = b.finish(out);
        assert!(c.check().is_ok());
        assert_eq!(c.eval(&[q(3, 1)]), q(10, 1));
        assert_eq!(c.eval(&[q(1, 2)]), q(5, 4));
    }

    #[test]
    fn unary_operations_collapse() {
        let mut b = CircuitBuilder::new();
        let x = b.var(0);
        assert_eq!(b.sum(vec![x]), x);
        assert_eq!(b.product(vec![x]), x);
        assert_eq!(b.var(0), x);
        let out = b.one_minus(x);
        let c = b.finish(out);
        assert!(c.check().is_ok());
        assert_eq!(c.eval(&[q(1, 4)]), q(3, 4));
        assert_eq!(c.to_doc().gates[1].value.as_deref(), Some("1/1"));
    }
}

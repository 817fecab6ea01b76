//! Polynomial encoding of the weighted objective.
//!
//! Each node's formula is brought to 3-CNF, each clause `(a | b | c)` becomes
//! `1 - a' b' c'` with `v' = 1 - v` for a positive literal and `v' = v` for a
//! negative one, and a node's formula becomes the product `q` of its clause
//! polynomials. The weighted objective is
//!
//! ```text
//! p = sum_i w_i * (x_i * q_i + (1 - x_i) / 2)
//! ```
//!
//! On Boolean points `p` maximized over the proof and auxiliary variables is
//! the total solution weight `t(x)`, so its maximum over the cube is `T` and
//! the `x` part of any maximizer is a correct query string.
//!
//! Away from the cube `p` is not multilinear. [`multilinear_eval`] evaluates
//! its multilinear extension by recursive convex combination instead of
//! building a circuit for it.

mod circuit;
mod cnf;
mod dyadic;

use std::cmp::Ordering;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::Serialize;

pub use circuit::{ArithCircuit, CircuitBuilder, CircuitDoc, Gate, GateDoc};
pub use cnf::{build_three_cnf, to_three_cnf, GlobalLiteral, GlobalVar, NodeThreeCnf, ThreeCnf};
pub use dyadic::Dyadic;

use crate::oracle::SatOracle;
use crate::querygraph::{is_correct_query_string, Literal, QueryDag, QueryString};
use crate::solver::{binary_search_t, ThresholdInstance};
use crate::weighting::{omega_weights, WeightAssignment, NP_ADMISSIBILITY};
use crate::{Error, Result};

pub const DEFAULT_MULTILINEAR_CAP: usize = 20;
pub const DEFAULT_BRUTE_FORCE_CAP: usize = 24;

/// `1 - prod(l')` for a clause of any width over the given variables.
fn clause_gate(b: &mut CircuitBuilder, lits: &[(usize, bool)]) -> usize {
    let factors = lits
        .iter()
        .map(|&(v, positive)| {
            let g = b.var(v);
            if positive {
                b.one_minus(g)
            } else {
                g
            }
        })
        .collect();
    let falsified = b.product(factors);
    b.one_minus(falsified)
}

/// Circuit for one 3-literal clause over variables `|lit| - 1`.
pub fn arithmetize_clause(clause: [Literal; 3]) -> ArithCircuit {
    arithmetize_formula(&[clause.to_vec()])
}

/// Product of clause polynomials for a CNF of any clause width, variables
/// `|lit| - 1`. The empty formula is the constant 1.
pub fn arithmetize_formula(clauses: &[Vec<Literal>]) -> ArithCircuit {
    let mut b = CircuitBuilder::new();
    let gates = clauses
        .iter()
        .map(|c| {
            let lits: Vec<(usize, bool)> = c.iter().map(|&l| (l.unsigned_abs() as usize - 1, l > 0)).collect();
            clause_gate(&mut b, &lits)
        })
        .collect();
    let out = b.product(gates);
    b.finish(out)
}

/// The objective polynomial together with its variable layout.
#[derive(Debug, Clone)]
pub struct Arithmetization {
    pub cnf: ThreeCnf,
    pub circuit: ArithCircuit,
    pub weights: WeightAssignment,
}

impl Arithmetization {
    pub fn var_count(&self) -> usize {
        self.cnf.var_count()
    }
}

/// Builds `p` for `g` under the given weights. Subcircuits for literals are
/// shared and no bracket is expanded, so the size is linear in the formula.
pub fn build_p(g: &QueryDag, weights: &WeightAssignment) -> Arithmetization {
    let cnf = build_three_cnf(g);
    let mut b = CircuitBuilder::new();
    let mut terms = Vec::with_capacity(g.len());
    for &i in g.topo_indices() {
        let clause_gates: Vec<usize> = cnf.clauses[i].iter().map(|c| clause_gate(&mut b, c)).collect();
        let q = b.product(clause_gates);
        let x = b.var(cnf.x_of[i]);
        let w = BigRational::from_integer(BigInt::from(weights.weights[i].clone()));
        let wc = b.constant(w.clone());
        let accept = b.product(vec![wc, x, q]);
        let half_w = b.constant(w / BigInt::from(2));
        let not_x = b.one_minus(x);
        let idle = b.product(vec![half_w, not_x]);
        terms.push(b.sum(vec![accept, idle]));
    }
    let out = b.sum(terms);
    Arithmetization {
        cnf,
        circuit: b.finish(out),
        weights: weights.clone(),
    }
}

/// `p` under `omega` weights with `c = 2`.
pub fn build_p_omega(g: &QueryDag) -> Arithmetization {
    build_p(g, &omega_weights(g, NP_ADMISSIBILITY))
}

fn is_boolean(v: &BigRational) -> bool {
    v.is_zero() || v.is_one()
}

/// Multilinear extension of `p` at `point`: Boolean coordinates are used as
/// they are, each fractional coordinate `s_k` splits into the convex
/// combination `(1 - s_k) p(.., 0, ..) + s_k p(.., 1, ..)`.
pub fn multilinear_eval(p: &ArithCircuit, point: &[BigRational], cap: usize) -> Result<BigRational> {
    let fractional: Vec<usize> = (0..point.len()).filter(|&k| !is_boolean(&point[k])).collect();
    if fractional.len() > cap {
        return Err(Error::Capacity {
            what: "fractional coordinates",
            size: fractional.len(),
            cap,
        });
    }
    let mut vertex = point.to_vec();
    let mut total = BigRational::zero();
    for mask in 0u64..1 << fractional.len() {
        let mut coefficient = BigRational::one();
        for (b, &k) in fractional.iter().enumerate() {
            let s = &point[k];
            if mask >> b & 1 == 1 {
                vertex[k] = BigRational::one();
                coefficient *= s;
            } else {
                vertex[k] = BigRational::zero();
                coefficient *= BigRational::one() - s;
            }
        }
        if !coefficient.is_zero() {
            total += coefficient * p.eval(&vertex);
        }
    }
    Ok(total)
}

/// Exact values with optional overflow, so the fast path can bail out.
trait Exact: Clone {
    fn from_const(c: &BigRational) -> Option<Self>;
    fn bit(b: bool) -> Self;
    fn add(&self, other: &Self) -> Option<Self>;
    fn mul(&self, other: &Self) -> Option<Self>;
    fn compare(&self, other: &Self) -> Option<Ordering>;
    fn rational(&self) -> BigRational;
}

impl Exact for Dyadic {
    fn from_const(c: &BigRational) -> Option<Self> {
        Dyadic::from_rational(c)
    }
    fn bit(b: bool) -> Self {
        if b {
            Dyadic::ONE
        } else {
            Dyadic::ZERO
        }
    }
    fn add(&self, other: &Self) -> Option<Self> {
        self.checked_add(*other)
    }
    fn mul(&self, other: &Self) -> Option<Self> {
        self.checked_mul(*other)
    }
    fn compare(&self, other: &Self) -> Option<Ordering> {
        self.checked_cmp(*other)
    }
    fn rational(&self) -> BigRational {
        self.to_rational()
    }
}

impl Exact for BigRational {
    fn from_const(c: &BigRational) -> Option<Self> {
        Some(c.clone())
    }
    fn bit(b: bool) -> Self {
        if b {
            BigRational::one()
        } else {
            BigRational::zero()
        }
    }
    fn add(&self, other: &Self) -> Option<Self> {
        Some(self + other)
    }
    fn mul(&self, other: &Self) -> Option<Self> {
        Some(self * other)
    }
    fn compare(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
    fn rational(&self) -> BigRational {
        self.clone()
    }
}

/// Gray-code enumeration of the cube, re-evaluating only the gates that
/// depend on the flipped variable. `None` on arithmetic overflow.
fn cube_max<T: Exact>(p: &ArithCircuit, var_count: usize) -> Option<(T, u64)> {
    let gates = p.gates();
    let mut consumers: Vec<Vec<usize>> = vec![Vec::new(); gates.len()];
    let mut var_gate = vec![None; var_count];
    for (id, g) in gates.iter().enumerate() {
        match g {
            Gate::Sum(cs) | Gate::Product(cs) => {
                for &c in cs {
                    consumers[c].push(id);
                }
            }
            Gate::Var(v) => var_gate[*v] = Some(id),
            Gate::Const(_) => {}
        }
    }
    // gates that depend on each variable, in evaluation order
    let cones: Vec<Vec<usize>> = var_gate
        .iter()
        .map(|start| {
            let Some(start) = *start else { return Vec::new() };
            let mut seen = vec![false; gates.len()];
            let mut stack = vec![start];
            seen[start] = true;
            let mut cone = Vec::new();
            while let Some(g) = stack.pop() {
                cone.push(g);
                for &c in &consumers[g] {
                    if !seen[c] {
                        seen[c] = true;
                        stack.push(c);
                    }
                }
            }
            cone.sort_unstable();
            cone
        })
        .collect();

    let mut point = vec![false; var_count];
    let mut values: Vec<T> = Vec::with_capacity(gates.len());
    for g in gates {
        let v = match g {
            Gate::Var(i) => T::bit(point[*i]),
            Gate::Const(c) => T::from_const(c)?,
            Gate::Sum(cs) => fold(&values, cs, T::add)?,
            Gate::Product(cs) => fold(&values, cs, T::mul)?,
        };
        values.push(v);
    }
    let out = p.output();
    let mut best = (values[out].clone(), 0u64);
    let mut code = 0u64;
    for step in 1u64..1 << var_count {
        let b = step.trailing_zeros() as usize;
        code ^= 1 << b;
        let var = var_count - 1 - b;
        point[var] = !point[var];
        for &g in &cones[var] {
            values[g] = match &gates[g] {
                Gate::Var(i) => T::bit(point[*i]),
                Gate::Sum(cs) => fold(&values, cs, T::add)?,
                Gate::Product(cs) => fold(&values, cs, T::mul)?,
                Gate::Const(_) => unreachable!("constants depend on no variable"),
            };
        }
        match values[out].compare(&best.0)? {
            Ordering::Greater => best = (values[out].clone(), code),
            Ordering::Equal if code < best.1 => best.1 = code,
            _ => {}
        }
    }
    Some(best)
}

fn fold<T: Exact>(values: &[T], children: &[usize], op: fn(&T, &T) -> Option<T>) -> Option<T> {
    let mut acc = values[children[0]].clone();
    for &c in &children[1..] {
        acc = op(&acc, &values[c])?;
    }
    Some(acc)
}

/// Exact maximum of `p` over `{0,1}^var_count` and the lexicographically
/// least maximizer, coordinate 0 most significant.
pub fn brute_force_max(p: &ArithCircuit, var_count: usize, cap: usize) -> Result<(BigRational, Vec<bool>)> {
    if var_count > cap || var_count >= 64 {
        return Err(Error::Capacity {
            what: "variables for cube maximization",
            size: var_count,
            cap,
        });
    }
    assert!(p.var_count() <= var_count, "circuit uses more variables than declared");
    let (value, code) = match cube_max::<Dyadic>(p, var_count) {
        Some((v, code)) => (v.rational(), code),
        None => {
            let (v, code) = cube_max::<BigRational>(p, var_count).expect("rationals never overflow");
            (v, code)
        }
    };
    let witness = (0..var_count).map(|k| code >> (var_count - 1 - k) & 1 == 1).collect();
    Ok((value, witness))
}

/// Reads the `x` block of a maximizer as a query string and checks it.
pub fn extract_from_optimum(g: &QueryDag, cnf: &ThreeCnf, witness: &[bool]) -> Result<QueryString> {
    let x: QueryString = cnf
        .x_nodes
        .iter()
        .enumerate()
        .map(|(rank, &i)| (g.nodes()[i].id, witness[rank]))
        .collect();
    if !is_correct_query_string(g, &x, &mut SatOracle::new())? {
        return Err(Error::Validation("maximizer does not encode a correct query string".into()));
    }
    Ok(x)
}

fn decimal<S: serde::Serializer>(v: &BigUint, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&v.to_string())
}

/// Query count of the binary search against the bit length of the optimum.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CompressionAudit {
    /// `2T` under `omega` weights.
    #[serde(serialize_with = "decimal")]
    pub t_scaled: BigUint,
    /// Bit length of `2T`.
    #[serde(rename = "B")]
    pub b: u64,
    /// `B + 1`.
    pub h_target: u64,
    /// Threshold queries spent by the binary search.
    pub queries_used: u64,
}

/// Runs the binary search for `2T` on `g` under `omega`. It asks
/// `bitlen(2W)` queries, and since `2T >= W` this is at most `B + 1`.
pub fn audit_weak_compression(g: &QueryDag) -> Result<CompressionAudit> {
    let weights = omega_weights(g, NP_ADMISSIBILITY);
    let mut oracle = SatOracle::new();
    let (t_scaled, queries_used) = binary_search_t(&ThresholdInstance::new(g, &weights), &mut oracle)?;
    let b = t_scaled.bits();
    Ok(CompressionAudit {
        t_scaled,
        b,
        h_target: b + 1,
        queries_used,
    })
}

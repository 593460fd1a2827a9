use std::cell::{Cell, RefCell};
use std::f64::consts::PI;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use super::real::Real;
use crate::error::{Error, Result};

const NO_PARENT: u32 = u32::MAX;

#[derive(Clone, Copy, Debug)]
struct Node {
    parents: [u32; 2],
    partials: [f64; 2],
}

#[derive(Clone, Copy, Debug, PartialEq)]
enum RootState {
    Unset,
    Set(usize),
    Multiple,
}

/// Append-only record of scalar operations.
///
/// Nodes are pushed in evaluation order, so every parent index is smaller
/// than its child's. Leaves created through [`Tape::leaf`] are the parameter
/// slots; [`Tape::gradient`] returns adjoints for them in creation order.
pub struct Tape {
    nodes: RefCell<Vec<Node>>,
    leaves: RefCell<Vec<usize>>,
    root: Cell<RootState>,
}

impl Default for Tape {
    fn default() -> Self {
        Self::new()
    }
}

impl Tape {
    pub fn new() -> Self {
        Tape {
            nodes: RefCell::new(Vec::new()),
            leaves: RefCell::new(Vec::new()),
            root: Cell::new(RootState::Unset),
        }
    }

    pub fn len(&self) -> usize {
        self.nodes.borrow().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Registers a parameter leaf.
    pub fn leaf(&self, value: f64) -> Var<'_> {
        let idx = self.push(Node {
            parents: [NO_PARENT; 2],
            partials: [0.0; 2],
        });
        self.leaves.borrow_mut().push(idx);
        Var {
            val: value,
            node: Some((self, idx)),
        }
    }

    pub fn leaves(&self, values: &[f64]) -> Vec<Var<'_>> {
        values.iter().map(|&v| self.leaf(v)).collect()
    }

    /// Declares `v` as the scalar root. Declaring a second root, or a root
    /// that does not live on this tape, makes [`Tape::gradient`] fail.
    pub fn mark_root(&self, v: Var<'_>) {
        let next = match (self.root.get(), v.node) {
            (RootState::Unset, Some((t, idx))) if std::ptr::eq(t, self) => RootState::Set(idx),
            (RootState::Unset, _) => RootState::Unset,
            _ => RootState::Multiple,
        };
        self.root.set(next);
    }

    /// Reverse sweep from the root; returns d(root)/d(leaf) for every leaf.
    pub fn gradient(&self) -> Result<Vec<f64>> {
        let root = match self.root.get() {
            RootState::Set(idx) => idx,
            RootState::Unset => return Err(Error::Tape("no root marked".into())),
            RootState::Multiple => return Err(Error::Tape("multiple roots marked".into())),
        };
        let nodes = self.nodes.borrow();
        let mut adj = vec![0.0; root + 1];
        adj[root] = 1.0;
        for i in (0..=root).rev() {
            let a = adj[i];
            if a == 0.0 {
                continue;
            }
            let node = nodes[i];
            for k in 0..2 {
                let p = node.parents[k];
                if p != NO_PARENT {
                    adj[p as usize] += node.partials[k] * a;
                }
            }
        }
        Ok(self
            .leaves
            .borrow()
            .iter()
            .map(|&l| if l <= root { adj[l] } else { 0.0 })
            .collect())
    }

    fn push(&self, node: Node) -> usize {
        let mut nodes = self.nodes.borrow_mut();
        nodes.push(node);
        nodes.len() - 1
    }
}

/// Scalar that is either a constant or a node on a [`Tape`].
#[derive(Clone, Copy)]
pub struct Var<'t> {
    val: f64,
    node: Option<(&'t Tape, usize)>,
}

impl fmt::Debug for Var<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.node {
            Some((_, idx)) => write!(f, "Var({} @{idx})", self.val),
            None => write!(f, "Const({})", self.val),
        }
    }
}

impl<'t> Var<'t> {
    pub fn constant(val: f64) -> Self {
        Var { val, node: None }
    }

    pub fn is_constant(&self) -> bool {
        self.node.is_none()
    }

    fn unary(self, val: f64, partial: f64) -> Self {
        match self.node {
            None => Var::constant(val),
            Some((tape, idx)) => Var {
                val,
                node: Some((
                    tape,
                    tape.push(Node {
                        parents: [idx as u32, NO_PARENT],
                        partials: [partial, 0.0],
                    }),
                )),
            },
        }
    }

    fn binary(self, other: Self, val: f64, da: f64, db: f64) -> Self {
        let tape = match (self.node, other.node) {
            (None, None) => return Var::constant(val),
            (Some((t, _)), _) | (None, Some((t, _))) => t,
        };
        let mut parents = [NO_PARENT; 2];
        let mut partials = [0.0; 2];
        let mut k = 0;
        for (v, d) in [(self, da), (other, db)] {
            if let Some((t, idx)) = v.node {
                debug_assert!(std::ptr::eq(t, tape), "variables from different tapes");
                parents[k] = idx as u32;
                partials[k] = d;
                k += 1;
            }
        }
        Var {
            val,
            node: Some((tape, tape.push(Node { parents, partials }))),
        }
    }
}

impl Add for Var<'_> {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        self.binary(o, self.val + o.val, 1.0, 1.0)
    }
}

impl Sub for Var<'_> {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        self.binary(o, self.val - o.val, 1.0, -1.0)
    }
}

impl Mul for Var<'_> {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        self.binary(o, self.val * o.val, o.val, self.val)
    }
}

impl Div for Var<'_> {
    type Output = Self;
    fn div(self, o: Self) -> Self {
        let q = self.val / o.val;
        self.binary(o, q, 1.0 / o.val, -q / o.val)
    }
}

impl Neg for Var<'_> {
    type Output = Self;
    fn neg(self) -> Self {
        self.unary(-self.val, -1.0)
    }
}

impl Add<f64> for Var<'_> {
    type Output = Self;
    fn add(self, c: f64) -> Self {
        self.unary(self.val + c, 1.0)
    }
}

impl Mul<f64> for Var<'_> {
    type Output = Self;
    fn mul(self, c: f64) -> Self {
        self.unary(self.val * c, c)
    }
}

impl Real for Var<'_> {
    fn cst(x: f64) -> Self {
        Var::constant(x)
    }
    fn value(&self) -> f64 {
        self.val
    }
    fn exp(self) -> Self {
        let e = self.val.exp();
        self.unary(e, e)
    }
    fn ln(self) -> Self {
        self.unary(self.val.ln(), 1.0 / self.val)
    }
    fn sin(self) -> Self {
        self.unary(self.val.sin(), self.val.cos())
    }
    fn cos(self) -> Self {
        self.unary(self.val.cos(), -self.val.sin())
    }
    fn sqrt(self) -> Self {
        let r = self.val.sqrt();
        self.unary(r, 0.5 / r)
    }
    fn erf(self) -> Self {
        let d = 2.0 / PI.sqrt() * (-self.val * self.val).exp();
        self.unary(libm::erf(self.val), d)
    }
    fn powf(self, p: f64) -> Self {
        self.unary(self.val.powf(p), p * self.val.powf(p - 1.0))
    }
    fn relu(self) -> Self {
        if self.val > 0.0 {
            self
        } else {
            Var::constant(0.0)
        }
    }
}

/// Value and gradient of `loss` at `params`, by reverse accumulation.
///
/// `loss` receives one leaf per parameter and returns the scalar root.
pub fn grad_params<F>(params: &[f64], loss: F) -> Result<(f64, Vec<f64>)>
where
    F: for<'t> FnOnce(&[Var<'t>]) -> Result<Var<'t>>,
{
    let tape = Tape::new();
    let leaves = tape.leaves(params);
    let root = loss(&leaves)?;
    if root.is_constant() {
        return Err(Error::Tape("loss does not depend on any recorded operation".into()));
    }
    tape.mark_root(root);
    let g = tape.gradient()?;
    Ok((root.value(), g))
}

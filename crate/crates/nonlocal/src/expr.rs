//! Expression trees for integrands `f(x, y, w, z)`.
//!
//! Grammar (no implicit multiplication, UTF-8 input):
//!
//! ```text
//! expr   := term (('+'|'-') term)*
//! term   := factor (('*'|'/') factor)*
//! factor := atom ('^' number)?
//! atom   := number | ident | func '(' args ')' | '(' expr ')'
//! ident  ∈ { x1..xm, y1..ym, w1..wn, z1..zn }
//! func   ∈ { abs, exp, log, sqrt, min, max, step, neg }
//! ```
//!
//! `step(t)` is `1` for `t ≥ 0` and `0` otherwise, evaluated exactly.
//!
//! Evaluation follows the measure-theoretic convention `0 · (anything) = 0`:
//! a product with an exact-zero factor is zero even when the other factor is
//! a pole, and `0/0 = 0`. Indicators built from `step` therefore gate
//! singular factors the way the integrands they encode intend. A division
//! with nonzero numerator and zero denominator, or a domain violation
//! (`log` of a nonpositive value, `sqrt` of a negative one), surfaces as a
//! pole error.

use crate::error::{Error, Result};
use std::cell::RefCell;
use std::fmt;

/// Which argument block a variable belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Slot {
    X,
    Y,
    W,
    Z,
}

impl Slot {
    pub fn letter(self) -> char {
        match self {
            Slot::X => 'x',
            Slot::Y => 'y',
            Slot::W => 'w',
            Slot::Z => 'z',
        }
    }
}

/// A variable reference, zero-based index into its slot.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Var {
    pub slot: Slot,
    pub index: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Const(f64),
    Var(Var),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    /// Power with a numeric literal exponent.
    Pow(Box<Expr>, f64),
    Neg(Box<Expr>),
    Abs(Box<Expr>),
    Exp(Box<Expr>),
    Log(Box<Expr>),
    Sqrt(Box<Expr>),
    Min(Box<Expr>, Box<Expr>),
    Max(Box<Expr>, Box<Expr>),
    Step(Box<Expr>),
}

impl Expr {
    pub fn var(slot: Slot, index: usize) -> Expr {
        Expr::Var(Var { slot, index })
    }

    /// True if any variable of `slot` occurs in the tree.
    pub fn uses_slot(&self, slot: Slot) -> bool {
        match self {
            Expr::Const(_) => false,
            Expr::Var(v) => v.slot == slot,
            Expr::Add(a, b)
            | Expr::Sub(a, b)
            | Expr::Mul(a, b)
            | Expr::Div(a, b)
            | Expr::Min(a, b)
            | Expr::Max(a, b) => a.uses_slot(slot) || b.uses_slot(slot),
            Expr::Pow(a, _) => a.uses_slot(slot),
            Expr::Neg(a) | Expr::Abs(a) | Expr::Exp(a) | Expr::Log(a) | Expr::Sqrt(a)
            | Expr::Step(a) => a.uses_slot(slot),
        }
    }

    /// True if some non-differentiable node (`abs`, `step`, `min`, `max`)
    /// has a `w` variable anywhere beneath it.
    pub fn nonsmooth_touches_w(&self) -> bool {
        match self {
            Expr::Const(_) | Expr::Var(_) => false,
            Expr::Abs(a) | Expr::Step(a) => a.uses_slot(Slot::W) || a.nonsmooth_touches_w(),
            Expr::Min(a, b) | Expr::Max(a, b) => {
                a.uses_slot(Slot::W)
                    || b.uses_slot(Slot::W)
                    || a.nonsmooth_touches_w()
                    || b.nonsmooth_touches_w()
            }
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => {
                a.nonsmooth_touches_w() || b.nonsmooth_touches_w()
            }
            Expr::Pow(a, _) => a.nonsmooth_touches_w(),
            Expr::Neg(a) | Expr::Exp(a) | Expr::Log(a) | Expr::Sqrt(a) => a.nonsmooth_touches_w(),
        }
    }

    /// Swaps the argument pairs: `x ↔ y` and `w ↔ z`.
    pub fn swap_pairs(&self) -> Expr {
        self.map_vars(&|v: &Var| {
            let slot = match v.slot {
                Slot::X => Slot::Y,
                Slot::Y => Slot::X,
                Slot::W => Slot::Z,
                Slot::Z => Slot::W,
            };
            Expr::Var(Var {
                slot,
                index: v.index,
            })
        })
    }

    fn map_vars(&self, map: &dyn Fn(&Var) -> Expr) -> Expr {
        match self {
            Expr::Const(c) => Expr::Const(*c),
            Expr::Var(v) => map(v),
            Expr::Add(a, b) => Expr::Add(a.map_vars(map).into(), b.map_vars(map).into()),
            Expr::Sub(a, b) => Expr::Sub(a.map_vars(map).into(), b.map_vars(map).into()),
            Expr::Mul(a, b) => Expr::Mul(a.map_vars(map).into(), b.map_vars(map).into()),
            Expr::Div(a, b) => Expr::Div(a.map_vars(map).into(), b.map_vars(map).into()),
            Expr::Pow(a, k) => Expr::Pow(a.map_vars(map).into(), *k),
            Expr::Neg(a) => Expr::Neg(a.map_vars(map).into()),
            Expr::Abs(a) => Expr::Abs(a.map_vars(map).into()),
            Expr::Exp(a) => Expr::Exp(a.map_vars(map).into()),
            Expr::Log(a) => Expr::Log(a.map_vars(map).into()),
            Expr::Sqrt(a) => Expr::Sqrt(a.map_vars(map).into()),
            Expr::Min(a, b) => Expr::Min(a.map_vars(map).into(), b.map_vars(map).into()),
            Expr::Max(a, b) => Expr::Max(a.map_vars(map).into(), b.map_vars(map).into()),
            Expr::Step(a) => Expr::Step(a.map_vars(map).into()),
        }
    }

    /// Partial derivative with respect to `w_index` (zero-based).
    ///
    /// `step` differentiates to `0` (its a.e. derivative); `abs`, `step`,
    /// `min`, `max` with `w` beneath them are rejected.
    pub fn diff_w(&self, w_index: usize) -> Result<Expr> {
        let d = |e: &Expr| e.diff_w(w_index);
        let ok = match self {
            Expr::Const(_) => Expr::Const(0.0),
            Expr::Var(v) => {
                if v.slot == Slot::W && v.index == w_index {
                    Expr::Const(1.0)
                } else {
                    Expr::Const(0.0)
                }
            }
            Expr::Add(a, b) => Expr::Add(d(a)?.into(), d(b)?.into()),
            Expr::Sub(a, b) => Expr::Sub(d(a)?.into(), d(b)?.into()),
            Expr::Mul(a, b) => Expr::Add(
                Expr::Mul(d(a)?.into(), b.clone()).into(),
                Expr::Mul(a.clone(), d(b)?.into()).into(),
            ),
            Expr::Div(a, b) => Expr::Div(
                Expr::Sub(
                    Expr::Mul(d(a)?.into(), b.clone()).into(),
                    Expr::Mul(a.clone(), d(b)?.into()).into(),
                )
                .into(),
                Expr::Pow(b.clone(), 2.0).into(),
            ),
            Expr::Pow(a, k) => {
                if *k == 0.0 {
                    Expr::Const(0.0)
                } else {
                    Expr::Mul(
                        Expr::Const(*k).into(),
                        Expr::Mul(Expr::Pow(a.clone(), k - 1.0).into(), d(a)?.into()).into(),
                    )
                }
            }
            Expr::Neg(a) => Expr::Neg(d(a)?.into()),
            Expr::Exp(a) => Expr::Mul(Expr::Exp(a.clone()).into(), d(a)?.into()),
            Expr::Log(a) => Expr::Div(d(a)?.into(), a.clone()),
            Expr::Sqrt(a) => Expr::Div(
                d(a)?.into(),
                Expr::Mul(Expr::Const(2.0).into(), Expr::Sqrt(a.clone()).into()).into(),
            ),
            Expr::Abs(a) | Expr::Step(a) => {
                if a.uses_slot(Slot::W) {
                    return Err(Error::NonSmoothInW(format!(
                        "cannot differentiate {self} in w"
                    )));
                }
                Expr::Const(0.0)
            }
            Expr::Min(a, b) | Expr::Max(a, b) => {
                if a.uses_slot(Slot::W) || b.uses_slot(Slot::W) {
                    return Err(Error::NonSmoothInW(format!(
                        "cannot differentiate {self} in w"
                    )));
                }
                Expr::Const(0.0)
            }
        };
        Ok(ok.simplify())
    }

    /// Bottom-up constant folding and identity elimination.
    ///
    /// `e · 0 → 0` and `0 / e → 0` agree with the runtime gating semantics.
    pub fn simplify(&self) -> Expr {
        match self {
            Expr::Const(_) | Expr::Var(_) => self.clone(),
            Expr::Add(a, b) => match (a.simplify(), b.simplify()) {
                (Expr::Const(x), Expr::Const(y)) => Expr::Const(x + y),
                (Expr::Const(c), e) | (e, Expr::Const(c)) if c == 0.0 => e,
                (a, b) => Expr::Add(a.into(), b.into()),
            },
            Expr::Sub(a, b) => match (a.simplify(), b.simplify()) {
                (Expr::Const(x), Expr::Const(y)) => Expr::Const(x - y),
                (e, Expr::Const(c)) if c == 0.0 => e,
                (a, b) => Expr::Sub(a.into(), b.into()),
            },
            Expr::Mul(a, b) => match (a.simplify(), b.simplify()) {
                (Expr::Const(x), Expr::Const(y)) => {
                    Expr::Const(if x == 0.0 || y == 0.0 { 0.0 } else { x * y })
                }
                (Expr::Const(c), _) | (_, Expr::Const(c)) if c == 0.0 => Expr::Const(0.0),
                (Expr::Const(c), e) | (e, Expr::Const(c)) if c == 1.0 => e,
                (a, b) => Expr::Mul(a.into(), b.into()),
            },
            Expr::Div(a, b) => match (a.simplify(), b.simplify()) {
                (Expr::Const(c), _) if c == 0.0 => Expr::Const(0.0),
                (e, Expr::Const(c)) if c == 1.0 => e,
                (Expr::Const(x), Expr::Const(y)) if y != 0.0 => Expr::Const(x / y),
                (a, b) => Expr::Div(a.into(), b.into()),
            },
            Expr::Pow(a, k) => match (a.simplify(), *k) {
                (_, k) if k == 0.0 => Expr::Const(1.0),
                (e, k) if k == 1.0 => e,
                (Expr::Const(x), k) => Expr::Const(pow_semantics(x, k)),
                (a, k) => Expr::Pow(a.into(), k),
            },
            Expr::Neg(a) => match a.simplify() {
                Expr::Const(x) => Expr::Const(-x),
                Expr::Neg(inner) => *inner,
                a => Expr::Neg(a.into()),
            },
            Expr::Abs(a) => Expr::Abs(a.simplify().into()),
            Expr::Exp(a) => Expr::Exp(a.simplify().into()),
            Expr::Log(a) => Expr::Log(a.simplify().into()),
            Expr::Sqrt(a) => Expr::Sqrt(a.simplify().into()),
            Expr::Min(a, b) => Expr::Min(a.simplify().into(), b.simplify().into()),
            Expr::Max(a, b) => Expr::Max(a.simplify().into(), b.simplify().into()),
            Expr::Step(a) => Expr::Step(a.simplify().into()),
        }
    }

    /// Reference tree-walking evaluator with the same semantics as
    /// [`Compiled::eval`]. Returns NaN for poles and domain violations.
    pub fn eval_ast(&self, x: &[f64], y: &[f64], w: &[f64], z: &[f64]) -> f64 {
        match self {
            Expr::Const(c) => *c,
            Expr::Var(v) => match v.slot {
                Slot::X => x[v.index],
                Slot::Y => y[v.index],
                Slot::W => w[v.index],
                Slot::Z => z[v.index],
            },
            Expr::Add(a, b) => a.eval_ast(x, y, w, z) + b.eval_ast(x, y, w, z),
            Expr::Sub(a, b) => a.eval_ast(x, y, w, z) - b.eval_ast(x, y, w, z),
            Expr::Mul(a, b) => {
                let va = a.eval_ast(x, y, w, z);
                let vb = b.eval_ast(x, y, w, z);
                if va == 0.0 || vb == 0.0 {
                    0.0
                } else {
                    va * vb
                }
            }
            Expr::Div(a, b) => {
                let va = a.eval_ast(x, y, w, z);
                let vb = b.eval_ast(x, y, w, z);
                if va == 0.0 {
                    0.0
                } else if vb == 0.0 {
                    f64::NAN
                } else {
                    va / vb
                }
            }
            Expr::Pow(a, k) => pow_semantics(a.eval_ast(x, y, w, z), *k),
            Expr::Neg(a) => -a.eval_ast(x, y, w, z),
            Expr::Abs(a) => a.eval_ast(x, y, w, z).abs(),
            Expr::Exp(a) => a.eval_ast(x, y, w, z).exp(),
            Expr::Log(a) => {
                let v = a.eval_ast(x, y, w, z);
                if v > 0.0 {
                    v.ln()
                } else {
                    f64::NAN
                }
            }
            Expr::Sqrt(a) => {
                let v = a.eval_ast(x, y, w, z);
                if v >= 0.0 {
                    v.sqrt()
                } else {
                    f64::NAN
                }
            }
            Expr::Min(a, b) => {
                let va = a.eval_ast(x, y, w, z);
                let vb = b.eval_ast(x, y, w, z);
                if va.is_nan() || vb.is_nan() {
                    f64::NAN
                } else {
                    va.min(vb)
                }
            }
            Expr::Max(a, b) => {
                let va = a.eval_ast(x, y, w, z);
                let vb = b.eval_ast(x, y, w, z);
                if va.is_nan() || vb.is_nan() {
                    f64::NAN
                } else {
                    va.max(vb)
                }
            }
            Expr::Step(a) => step_semantics(a.eval_ast(x, y, w, z)),
        }
    }

    pub fn compile(&self) -> Compiled {
        fn emit(e: &Expr, prog: &mut Vec<Instr>, depth: &mut usize, max: &mut usize) {
            match e {
                Expr::Const(c) => {
                    prog.push(Instr::Const(*c));
                    *depth += 1;
                    *max = (*max).max(*depth);
                }
                Expr::Var(v) => {
                    prog.push(Instr::Load(v.slot, v.index as u16));
                    *depth += 1;
                    *max = (*max).max(*depth);
                }
                Expr::Add(a, b) => {
                    emit(a, prog, depth, max);
                    emit(b, prog, depth, max);
                    prog.push(Instr::Add);
                    *depth -= 1;
                }
                Expr::Sub(a, b) => {
                    emit(a, prog, depth, max);
                    emit(b, prog, depth, max);
                    prog.push(Instr::Sub);
                    *depth -= 1;
                }
                Expr::Mul(a, b) => {
                    emit(a, prog, depth, max);
                    emit(b, prog, depth, max);
                    prog.push(Instr::Mul);
                    *depth -= 1;
                }
                Expr::Div(a, b) => {
                    emit(a, prog, depth, max);
                    emit(b, prog, depth, max);
                    prog.push(Instr::Div);
                    *depth -= 1;
                }
                Expr::Pow(a, k) => {
                    emit(a, prog, depth, max);
                    if k.fract() == 0.0 && k.abs() <= i32::MAX as f64 {
                        prog.push(Instr::PowI(*k as i32));
                    } else {
                        prog.push(Instr::PowF(*k));
                    }
                }
                Expr::Neg(a) => {
                    emit(a, prog, depth, max);
                    prog.push(Instr::Neg);
                }
                Expr::Abs(a) => {
                    emit(a, prog, depth, max);
                    prog.push(Instr::Abs);
                }
                Expr::Exp(a) => {
                    emit(a, prog, depth, max);
                    prog.push(Instr::Exp);
                }
                Expr::Log(a) => {
                    emit(a, prog, depth, max);
                    prog.push(Instr::Log);
                }
                Expr::Sqrt(a) => {
                    emit(a, prog, depth, max);
                    prog.push(Instr::Sqrt);
                }
                Expr::Min(a, b) => {
                    emit(a, prog, depth, max);
                    emit(b, prog, depth, max);
                    prog.push(Instr::Min);
                    *depth -= 1;
                }
                Expr::Max(a, b) => {
                    emit(a, prog, depth, max);
                    emit(b, prog, depth, max);
                    prog.push(Instr::Max);
                    *depth -= 1;
                }
                Expr::Step(a) => {
                    emit(a, prog, depth, max);
                    prog.push(Instr::Step);
                }
            }
        }
        let mut prog = Vec::new();
        let mut depth = 0usize;
        let mut max = 0usize;
        emit(self, &mut prog, &mut depth, &mut max);
        debug_assert_eq!(depth, 1);
        Compiled {
            prog,
            stack_depth: max.max(1),
        }
    }
}

#[inline]
fn step_semantics(t: f64) -> f64 {
    if t.is_nan() {
        f64::NAN
    } else if t >= 0.0 {
        1.0
    } else {
        0.0
    }
}

#[inline]
fn pow_semantics(v: f64, k: f64) -> f64 {
    if k.fract() == 0.0 && k.abs() <= i32::MAX as f64 {
        v.powi(k as i32)
    } else {
        v.powf(k)
    }
}

#[derive(Clone, Copy, Debug)]
enum Instr {
    Const(f64),
    Load(Slot, u16),
    Add,
    Sub,
    Mul,
    Div,
    PowI(i32),
    PowF(f64),
    Neg,
    Abs,
    Exp,
    Log,
    Sqrt,
    Min,
    Max,
    Step,
}

/// Flat postfix program for fast repeated evaluation.
#[derive(Clone, Debug)]
pub struct Compiled {
    prog: Vec<Instr>,
    stack_depth: usize,
}

thread_local! {
    static STACK: RefCell<Vec<f64>> = const { RefCell::new(Vec::new()) };
}

impl Compiled {
    /// Evaluates at `(x, y, w, z)`. Returns NaN (or ±∞ from overflow) for
    /// poles and domain violations; callers classify non-finite results.
    pub fn eval(&self, x: &[f64], y: &[f64], w: &[f64], z: &[f64]) -> f64 {
        STACK.with(|cell| {
            let mut stack = cell.borrow_mut();
            stack.clear();
            stack.reserve(self.stack_depth);
            for instr in &self.prog {
                match *instr {
                    Instr::Const(c) => stack.push(c),
                    Instr::Load(slot, idx) => {
                        let v = match slot {
                            Slot::X => x[idx as usize],
                            Slot::Y => y[idx as usize],
                            Slot::W => w[idx as usize],
                            Slot::Z => z[idx as usize],
                        };
                        stack.push(v);
                    }
                    Instr::Add => binop(&mut stack, |a, b| a + b),
                    Instr::Sub => binop(&mut stack, |a, b| a - b),
                    Instr::Mul => binop(&mut stack, |a, b| {
                        if a == 0.0 || b == 0.0 {
                            0.0
                        } else {
                            a * b
                        }
                    }),
                    Instr::Div => binop(&mut stack, |a, b| {
                        if a == 0.0 {
                            0.0
                        } else if b == 0.0 {
                            f64::NAN
                        } else {
                            a / b
                        }
                    }),
                    Instr::PowI(k) => unop(&mut stack, |v| v.powi(k)),
                    Instr::PowF(k) => unop(&mut stack, |v| v.powf(k)),
                    Instr::Neg => unop(&mut stack, |v| -v),
                    Instr::Abs => unop(&mut stack, f64::abs),
                    Instr::Exp => unop(&mut stack, f64::exp),
                    Instr::Log => unop(&mut stack, |v| if v > 0.0 { v.ln() } else { f64::NAN }),
                    Instr::Sqrt => {
                        unop(&mut stack, |v| if v >= 0.0 { v.sqrt() } else { f64::NAN })
                    }
                    Instr::Min => binop(&mut stack, |a, b| {
                        if a.is_nan() || b.is_nan() {
                            f64::NAN
                        } else {
                            a.min(b)
                        }
                    }),
                    Instr::Max => binop(&mut stack, |a, b| {
                        if a.is_nan() || b.is_nan() {
                            f64::NAN
                        } else {
                            a.max(b)
                        }
                    }),
                    Instr::Step => unop(&mut stack, step_semantics),
                }
            }
            debug_assert_eq!(stack.len(), 1);
            stack[0]
        })
    }

    /// Like [`Self::eval`] but classifies non-finite results as pole errors.
    pub fn eval_checked(&self, x: &[f64], y: &[f64], w: &[f64], z: &[f64]) -> Result<f64> {
        let v = self.eval(x, y, w, z);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::Pole(format!(
                "integrand is {v} at x={x:?}, y={y:?}, w={w:?}, z={z:?}"
            )))
        }
    }
}

#[inline]
fn binop(stack: &mut Vec<f64>, f: impl Fn(f64, f64) -> f64) {
    let b = stack.pop().expect("stack underflow");
    let a = stack.pop().expect("stack underflow");
    stack.push(f(a, b));
}

#[inline]
fn unop(stack: &mut Vec<f64>, f: impl Fn(f64) -> f64) {
    let a = stack.pop().expect("stack underflow");
    stack.push(f(a));
}

// ---------------------------------------------------------------------------
// Parsing
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    Comma,
}

struct Lexer<'a> {
    text: &'a str,
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn tokens(text: &'a str) -> Result<Vec<(usize, Tok)>> {
        let mut lx = Lexer { text, pos: 0 };
        let mut out = Vec::new();
        while let Some((at, tok)) = lx.next_token()? {
            out.push((at, tok));
        }
        Ok(out)
    }

    fn next_token(&mut self) -> Result<Option<(usize, Tok)>> {
        let bytes = self.text.as_bytes();
        while self.pos < bytes.len() && bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
        if self.pos >= bytes.len() {
            return Ok(None);
        }
        let start = self.pos;
        let c = bytes[self.pos];
        let tok = match c {
            b'+' => {
                self.pos += 1;
                Tok::Plus
            }
            b'-' => {
                self.pos += 1;
                Tok::Minus
            }
            b'*' => {
                self.pos += 1;
                Tok::Star
            }
            b'/' => {
                self.pos += 1;
                Tok::Slash
            }
            b'^' => {
                self.pos += 1;
                Tok::Caret
            }
            b'(' => {
                self.pos += 1;
                Tok::LParen
            }
            b')' => {
                self.pos += 1;
                Tok::RParen
            }
            b',' => {
                self.pos += 1;
                Tok::Comma
            }
            b'0'..=b'9' => {
                while self.pos < bytes.len() && bytes[self.pos].is_ascii_digit() {
                    self.pos += 1;
                }
                if self.pos < bytes.len() && bytes[self.pos] == b'.' {
                    self.pos += 1;
                    while self.pos < bytes.len() && bytes[self.pos].is_ascii_digit() {
                        self.pos += 1;
                    }
                }
                if self.pos < bytes.len() && (bytes[self.pos] | 32) == b'e' {
                    let mark = self.pos;
                    self.pos += 1;
                    if self.pos < bytes.len()
                        && (bytes[self.pos] == b'+' || bytes[self.pos] == b'-')
                    {
                        self.pos += 1;
                    }
                    if self.pos < bytes.len() && bytes[self.pos].is_ascii_digit() {
                        while self.pos < bytes.len() && bytes[self.pos].is_ascii_digit() {
                            self.pos += 1;
                        }
                    } else {
                        self.pos = mark;
                    }
                }
                let lit = &self.text[start..self.pos];
                let v: f64 = lit.parse().map_err(|_| Error::Parse {
                    offset: start,
                    message: format!("bad number literal '{lit}'"),
                })?;
                Tok::Num(v)
            }
            c if c.is_ascii_alphabetic() => {
                while self.pos < bytes.len()
                    && (bytes[self.pos].is_ascii_alphanumeric() || bytes[self.pos] == b'_')
                {
                    self.pos += 1;
                }
                Tok::Ident(self.text[start..self.pos].to_string())
            }
            other => {
                return Err(Error::Parse {
                    offset: start,
                    message: format!("unexpected character '{}'", other as char),
                })
            }
        };
        Ok(Some((start, tok)))
    }
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    cursor: usize,
    dim_m: usize,
    dim_n: usize,
    text_len: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.cursor).map(|(_, t)| t)
    }

    fn peek_offset(&self) -> usize {
        self.toks
            .get(self.cursor)
            .map(|(at, _)| *at)
            .unwrap_or(self.text_len)
    }

    /// Offset reported for an unexpected end of input: the start of the last
    /// token (the construct that demands a continuation), or the text end.
    fn eof_offset(&self) -> usize {
        if self.cursor > 0 {
            self.toks[self.cursor - 1].0
        } else {
            self.text_len
        }
    }

    fn bump(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.cursor).map(|(_, t)| t.clone());
        if t.is_some() {
            self.cursor += 1;
        }
        t
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<()> {
        match self.peek() {
            Some(t) if *t == tok => {
                self.cursor += 1;
                Ok(())
            }
            Some(_) => Err(Error::Parse {
                offset: self.peek_offset(),
                message: format!("expected {what}"),
            }),
            None => Err(Error::Parse {
                offset: self.eof_offset(),
                message: format!("expected {what}, found end of input"),
            }),
        }
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut acc = self.term()?;
        loop {
            match self.peek() {
                Some(Tok::Plus) => {
                    self.cursor += 1;
                    acc = Expr::Add(acc.into(), self.term()?.into());
                }
                Some(Tok::Minus) => {
                    self.cursor += 1;
                    acc = Expr::Sub(acc.into(), self.term()?.into());
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut acc = self.factor()?;
        loop {
            match self.peek() {
                Some(Tok::Star) => {
                    self.cursor += 1;
                    acc = Expr::Mul(acc.into(), self.factor()?.into());
                }
                Some(Tok::Slash) => {
                    self.cursor += 1;
                    acc = Expr::Div(acc.into(), self.factor()?.into());
                }
                _ => return Ok(acc),
            }
        }
    }

    fn factor(&mut self) -> Result<Expr> {
        let base = self.atom()?;
        if let Some(Tok::Caret) = self.peek() {
            self.cursor += 1;
            match self.bump() {
                Some(Tok::Num(k)) => Ok(Expr::Pow(base.into(), k)),
                Some(_) => Err(Error::Parse {
                    offset: self.toks[self.cursor - 1].0,
                    message: "exponent must be a number literal".into(),
                }),
                None => Err(Error::Parse {
                    offset: self.eof_offset(),
                    message: "expected exponent, found end of input".into(),
                }),
            }
        } else {
            Ok(base)
        }
    }

    fn atom(&mut self) -> Result<Expr> {
        let at = self.peek_offset();
        match self.bump() {
            Some(Tok::Num(v)) => Ok(Expr::Const(v)),
            Some(Tok::LParen) => {
                let inner = self.expr()?;
                self.expect(Tok::RParen, "')'")?;
                Ok(inner)
            }
            Some(Tok::Ident(name)) => self.ident(at, name),
            Some(_) => Err(Error::Parse {
                offset: at,
                message: "expected a number, variable, function call or '('".into(),
            }),
            None => Err(Error::Parse {
                offset: self.eof_offset(),
                message: "expected a number, variable, function call or '(', found end of input"
                    .into(),
            }),
        }
    }

    fn ident(&mut self, at: usize, name: String) -> Result<Expr> {
        const FUNCS: &[&str] = &["abs", "exp", "log", "sqrt", "min", "max", "step", "neg"];
        if FUNCS.contains(&name.as_str()) {
            self.expect(Tok::LParen, "'(' after function name")?;
            let mut args = vec![self.expr()?];
            while let Some(Tok::Comma) = self.peek() {
                self.cursor += 1;
                args.push(self.expr()?);
            }
            self.expect(Tok::RParen, "')'")?;
            let arity = if matches!(name.as_str(), "min" | "max") {
                2
            } else {
                1
            };
            if args.len() != arity {
                return Err(Error::Parse {
                    offset: at,
                    message: format!("{name} expects {arity} argument(s), got {}", args.len()),
                });
            }
            let mut it = args.into_iter();
            let a = Box::new(it.next().unwrap());
            return Ok(match name.as_str() {
                "abs" => Expr::Abs(a),
                "exp" => Expr::Exp(a),
                "log" => Expr::Log(a),
                "sqrt" => Expr::Sqrt(a),
                "step" => Expr::Step(a),
                "neg" => Expr::Neg(a),
                "min" => Expr::Min(a, it.next().unwrap().into()),
                "max" => Expr::Max(a, it.next().unwrap().into()),
                _ => unreachable!(),
            });
        }
        let (head, digits) = name.split_at(1);
        let slot = match head {
            "x" => Slot::X,
            "y" => Slot::Y,
            "w" => Slot::W,
            "z" => Slot::Z,
            _ => {
                return Err(Error::Parse {
                    offset: at,
                    message: format!("unknown identifier '{name}'"),
                })
            }
        };
        let idx: usize = digits.parse().map_err(|_| Error::Parse {
            offset: at,
            message: format!("unknown identifier '{name}'"),
        })?;
        let limit = match slot {
            Slot::X | Slot::Y => self.dim_m,
            Slot::W | Slot::Z => self.dim_n,
        };
        if idx == 0 || idx > limit {
            return Err(Error::Parse {
                offset: at,
                message: format!(
                    "variable {name} out of range (declared {} = {limit})",
                    if matches!(slot, Slot::X | Slot::Y) {
                        "m"
                    } else {
                        "n"
                    }
                ),
            });
        }
        Ok(Expr::var(slot, idx - 1))
    }
}

/// Parses an expression over `x1..xm, y1..ym, w1..wn, z1..zn`.
pub fn parse(text: &str, dim_m: usize, dim_n: usize) -> Result<Expr> {
    let toks = Lexer::tokens(text)?;
    let mut parser = Parser {
        toks,
        cursor: 0,
        dim_m,
        dim_n,
        text_len: text.len(),
    };
    let expr = parser.expr()?;
    if parser.cursor < parser.toks.len() {
        return Err(Error::Parse {
            offset: parser.peek_offset(),
            message: "unexpected trailing input".into(),
        });
    }
    Ok(expr)
}

// ---------------------------------------------------------------------------
// Pretty printing (the output re-parses to an equivalent expression)
// ---------------------------------------------------------------------------

impl Expr {
    fn precedence(&self) -> u8 {
        match self {
            Expr::Add(..) | Expr::Sub(..) => 1,
            Expr::Mul(..) | Expr::Div(..) => 2,
            Expr::Pow(..) => 3,
            _ => 4,
        }
    }

    fn fmt_prec(&self, f: &mut fmt::Formatter<'_>, min_prec: u8) -> fmt::Result {
        let prec = self.precedence();
        if prec < min_prec {
            write!(f, "(")?;
        }
        match self {
            Expr::Const(c) => {
                if *c < 0.0 {
                    write!(f, "neg({:?})", -c)?;
                } else {
                    write!(f, "{c:?}")?;
                }
            }
            Expr::Var(v) => write!(f, "{}{}", v.slot.letter(), v.index + 1)?,
            Expr::Add(a, b) => {
                a.fmt_prec(f, 1)?;
                write!(f, " + ")?;
                b.fmt_prec(f, 2)?;
            }
            Expr::Sub(a, b) => {
                a.fmt_prec(f, 1)?;
                write!(f, " - ")?;
                b.fmt_prec(f, 2)?;
            }
            Expr::Mul(a, b) => {
                a.fmt_prec(f, 2)?;
                write!(f, " * ")?;
                b.fmt_prec(f, 3)?;
            }
            Expr::Div(a, b) => {
                a.fmt_prec(f, 2)?;
                write!(f, " / ")?;
                b.fmt_prec(f, 3)?;
            }
            Expr::Pow(a, k) => {
                let fmt_exp = |k: f64| {
                    if k.fract() == 0.0 && k.abs() < 1e15 {
                        format!("{}", k as i64)
                    } else {
                        format!("{k:?}")
                    }
                };
                if *k < 0.0 {
                    write!(f, "1 / ")?;
                    a.fmt_prec(f, 4)?;
                    write!(f, "^{}", fmt_exp(-k))?;
                } else {
                    a.fmt_prec(f, 4)?;
                    write!(f, "^{}", fmt_exp(*k))?;
                }
            }
            Expr::Neg(a) => {
                write!(f, "neg(")?;
                a.fmt_prec(f, 0)?;
                write!(f, ")")?;
            }
            Expr::Abs(a) => {
                write!(f, "abs(")?;
                a.fmt_prec(f, 0)?;
                write!(f, ")")?;
            }
            Expr::Exp(a) => {
                write!(f, "exp(")?;
                a.fmt_prec(f, 0)?;
                write!(f, ")")?;
            }
            Expr::Log(a) => {
                write!(f, "log(")?;
                a.fmt_prec(f, 0)?;
                write!(f, ")")?;
            }
            Expr::Sqrt(a) => {
                write!(f, "sqrt(")?;
                a.fmt_prec(f, 0)?;
                write!(f, ")")?;
            }
            Expr::Min(a, b) => {
                write!(f, "min(")?;
                a.fmt_prec(f, 0)?;
                write!(f, ", ")?;
                b.fmt_prec(f, 0)?;
                write!(f, ")")?;
            }
            Expr::Max(a, b) => {
                write!(f, "max(")?;
                a.fmt_prec(f, 0)?;
                write!(f, ", ")?;
                b.fmt_prec(f, 0)?;
                write!(f, ")")?;
            }
            Expr::Step(a) => {
                write!(f, "step(")?;
                a.fmt_prec(f, 0)?;
                write!(f, ")")?;
            }
        }
        if prec < min_prec {
            write!(f, ")")?;
        }
        Ok(())
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_prec(f, 0)
    }
}

//! Width-5 matrix branching programs.
//!
//! A program reads input bit `j mod n` at step `j`, multiplies the chosen
//! permutations left to right, and accepts if the product is `q_acc`.
//! Formulas compile by Barrington's recursion; small truth tables compile by
//! concatenating programs for disjoint cubes.

use alloc::boxed::Box;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::perm::Perm5;
use crate::{ceil_log2, Bits, Error, Result};

/// Default cap on compiled instruction counts.
pub const DEFAULT_INSTRUCTION_CAP: u128 = 1 << 22;
/// Largest input width accepted by the truth-table front end.
pub const MAX_TABLE_INPUTS: usize = 20;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum BpOutput {
    Zero,
    One,
    Undef,
}

impl BpOutput {
    pub fn bit(self) -> Option<bool> {
        match self {
            BpOutput::Zero => Some(false),
            BpOutput::One => Some(true),
            BpOutput::Undef => None,
        }
    }
}

/// An ordered program: instruction `j` reads input `j mod n`.
#[derive(Clone, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Mbp {
    pub instructions: Vec<[Perm5; 2]>,
    pub n: usize,
    pub q_acc: Perm5,
    pub q_rej: Perm5,
}

impl Mbp {
    pub fn len(&self) -> usize {
        self.instructions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instructions.is_empty()
    }

    /// Product along the path selected by `w`.
    pub fn path_product(&self, w: &Bits) -> Result<Perm5> {
        if w.len() != self.n {
            return Err(Error::BadInput(alloc::format!("input has {} bits, program reads {}", w.len(), self.n)));
        }
        if self.n == 0 || self.len() % self.n != 0 {
            return Err(Error::BadInput("program is not in ordered form".into()));
        }
        Ok(self
            .instructions
            .iter()
            .enumerate()
            .fold(Perm5::IDENTITY, |acc, (j, ins)| acc.then(ins[w.get(j % self.n) as usize])))
    }

    pub fn classify(&self, product: Perm5) -> BpOutput {
        if product == self.q_acc {
            BpOutput::One
        } else if product == self.q_rej {
            BpOutput::Zero
        } else {
            BpOutput::Undef
        }
    }

    /// Append identity instructions up to `len` (a multiple of `n`).
    pub fn padded_to(&self, len: usize) -> Result<Mbp> {
        if len < self.len() || len % self.n != 0 {
            return Err(Error::BadInput(alloc::format!("cannot pad length {} to {len}", self.len())));
        }
        let mut out = self.clone();
        out.instructions.resize(len, [Perm5::IDENTITY; 2]);
        Ok(out)
    }
}

pub fn mbp_eval(p: &Mbp, w: &Bits) -> Result<BpOutput> {
    Ok(p.classify(p.path_product(w)?))
}

/// One instruction of a program before ordering. `var: None` marks an
/// instruction whose two branches are equal, which may read any input.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RawInstr {
    pub var: Option<usize>,
    pub perms: [Perm5; 2],
}

impl RawInstr {
    fn free(p: Perm5) -> Self {
        RawInstr { var: None, perms: [p, p] }
    }

    fn fold_right(&mut self, g: Perm5) {
        self.perms = [self.perms[0].then(g), self.perms[1].then(g)];
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RawMbp {
    pub instructions: Vec<RawInstr>,
    pub n: usize,
    pub q_acc: Perm5,
    pub q_rej: Perm5,
}

impl RawMbp {
    pub fn eval(&self, w: &Bits) -> BpOutput {
        let p = self.instructions.iter().fold(Perm5::IDENTITY, |acc, ins| {
            acc.then(ins.perms[ins.var.map_or(0, |v| w.get(v) as usize)])
        });
        if p == self.q_acc {
            BpOutput::One
        } else if p == self.q_rej {
            BpOutput::Zero
        } else {
            BpOutput::Undef
        }
    }
}

/// Place every instruction at the next step that reads its variable,
/// filling gaps with identities, then pad to a multiple of `n`. Free
/// identity instructions are dropped; other free instructions take the next
/// step whatever it reads.
pub fn order_inputs(raw: &RawMbp) -> Mbp {
    let n = raw.n.max(1);
    let mut out: Vec<[Perm5; 2]> = Vec::with_capacity(raw.instructions.len());
    for ins in &raw.instructions {
        match ins.var {
            None if ins.perms[0].is_identity() && ins.perms[1].is_identity() => {}
            None => out.push(ins.perms),
            Some(v) => {
                while out.len() % n != v {
                    out.push([Perm5::IDENTITY; 2]);
                }
                out.push(ins.perms);
            }
        }
    }
    let len = out.len().div_ceil(n).max(1) * n;
    out.resize(len, [Perm5::IDENTITY; 2]);
    Mbp { instructions: out, n, q_acc: raw.q_acc, q_rej: raw.q_rej }
}

#[derive(Clone, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Formula {
    Var(usize),
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
}

impl Formula {
    pub fn var(i: usize) -> Formula {
        Formula::Var(i)
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(f: Formula) -> Formula {
        Formula::Not(Box::new(f))
    }

    pub fn and(a: Formula, b: Formula) -> Formula {
        Formula::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Formula, b: Formula) -> Formula {
        Formula::Or(Box::new(a), Box::new(b))
    }

    /// `(a ∧ ¬b) ∨ (¬a ∧ b)`.
    pub fn xor(a: Formula, b: Formula) -> Formula {
        Formula::or(Formula::and(a.clone(), Formula::not(b.clone())), Formula::and(Formula::not(a), b))
    }

    /// `(a ∧ b) ∨ (¬a ∧ ¬b)`.
    pub fn xnor(a: Formula, b: Formula) -> Formula {
        Formula::or(Formula::and(a.clone(), b.clone()), Formula::and(Formula::not(a), Formula::not(b)))
    }

    /// Balanced fold; `None` for an empty list.
    pub fn balanced(mut items: Vec<Formula>, join: fn(Formula, Formula) -> Formula) -> Option<Formula> {
        if items.is_empty() {
            return None;
        }
        while items.len() > 1 {
            let mut next = Vec::with_capacity(items.len().div_ceil(2));
            let mut it = items.into_iter();
            while let Some(a) = it.next() {
                next.push(match it.next() {
                    Some(b) => join(a, b),
                    None => a,
                });
            }
            items = next;
        }
        items.pop()
    }

    /// Number of nested binary gates; negation is free.
    pub fn depth(&self) -> usize {
        match self {
            Formula::Var(_) => 0,
            Formula::Not(f) => f.depth(),
            Formula::And(a, b) | Formula::Or(a, b) => 1 + a.depth().max(b.depth()),
        }
    }

    /// One more than the largest variable index.
    pub fn arity(&self) -> usize {
        match self {
            Formula::Var(i) => i + 1,
            Formula::Not(f) => f.arity(),
            Formula::And(a, b) | Formula::Or(a, b) => a.arity().max(b.arity()),
        }
    }

    pub fn eval(&self, w: &Bits) -> bool {
        match self {
            Formula::Var(i) => w.get(*i),
            Formula::Not(f) => !f.eval(w),
            Formula::And(a, b) => a.eval(w) && b.eval(w),
            Formula::Or(a, b) => a.eval(w) || b.eval(w),
        }
    }

    /// Parse `x0 & (x1 | !x2)`. `!` binds tightest, then `&`, then `^`,
    /// then `|`; `^` expands to its AND/OR form.
    pub fn parse(src: &str) -> Result<Formula> {
        let mut p = Parser { s: src.as_bytes(), i: 0 };
        let f = p.or()?;
        p.ws();
        if p.i != p.s.len() {
            return Err(p.err("trailing input"));
        }
        Ok(f)
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Formula::Var(i) => write!(f, "x{i}"),
            Formula::Not(g) => match **g {
                Formula::Var(_) | Formula::Not(_) => write!(f, "!{g}"),
                _ => write!(f, "!({g})"),
            },
            Formula::And(a, b) => write!(f, "({a} & {b})"),
            Formula::Or(a, b) => write!(f, "({a} | {b})"),
        }
    }
}

impl fmt::Debug for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

struct Parser<'a> {
    s: &'a [u8],
    i: usize,
}

impl Parser<'_> {
    fn err(&self, msg: &str) -> Error {
        Error::BadInput(alloc::format!("formula: {msg} at byte {}", self.i))
    }

    fn ws(&mut self) {
        while self.i < self.s.len() && self.s[self.i].is_ascii_whitespace() {
            self.i += 1;
        }
    }

    fn eat(&mut self, c: u8) -> bool {
        self.ws();
        if self.s.get(self.i) == Some(&c) {
            self.i += 1;
            true
        } else {
            false
        }
    }

    fn or(&mut self) -> Result<Formula> {
        let mut f = self.xor()?;
        while self.eat(b'|') {
            f = Formula::or(f, self.xor()?);
        }
        Ok(f)
    }

    fn xor(&mut self) -> Result<Formula> {
        let mut f = self.and()?;
        while self.eat(b'^') {
            f = Formula::xor(f, self.and()?);
        }
        Ok(f)
    }

    fn and(&mut self) -> Result<Formula> {
        let mut f = self.unary()?;
        while self.eat(b'&') {
            f = Formula::and(f, self.unary()?);
        }
        Ok(f)
    }

    fn unary(&mut self) -> Result<Formula> {
        if self.eat(b'!') {
            return Ok(Formula::not(self.unary()?));
        }
        if self.eat(b'(') {
            let f = self.or()?;
            if !self.eat(b')') {
                return Err(self.err("expected ')'"));
            }
            return Ok(f);
        }
        self.ws();
        if self.eat(b'x') {
            let start = self.i;
            while self.i < self.s.len() && self.s[self.i].is_ascii_digit() {
                self.i += 1;
            }
            let digits = core::str::from_utf8(&self.s[start..self.i]).map_err(|_| self.err("bad utf-8"))?;
            let idx: usize = digits.parse().map_err(|_| self.err("expected variable index"))?;
            return Ok(Formula::Var(idx));
        }
        Err(self.err("expected x<i>, '!' or '('"))
    }
}

/// Barrington compiler state: for every 5-cycle `γ`, a pair of 5-cycles
/// whose commutator `α β α⁻¹ β⁻¹` is `γ`.
pub struct Barrington {
    commutators: Vec<(Perm5, Perm5, Perm5)>,
    pub cap: u128,
}

impl Default for Barrington {
    fn default() -> Self {
        Barrington::new()
    }
}

impl Barrington {
    pub fn new() -> Self {
        let cycles: Vec<Perm5> = Perm5::all().filter(|p| p.is_five_cycle()).collect();
        let mut commutators: Vec<(Perm5, Perm5, Perm5)> = Vec::new();
        for &a in &cycles {
            for &b in &cycles {
                let c = a.then(b).then(a.inverse()).then(b.inverse());
                if c.is_five_cycle() && !commutators.iter().any(|t| t.0 == c) {
                    commutators.push((c, a, b));
                }
            }
        }
        debug_assert_eq!(commutators.len(), 24);
        Barrington { commutators, cap: DEFAULT_INSTRUCTION_CAP }
    }

    pub fn with_cap(cap: u128) -> Self {
        Barrington { cap, ..Barrington::new() }
    }

    fn commutator_pair(&self, gamma: Perm5) -> (Perm5, Perm5) {
        let t = self.commutators.iter().find(|t| t.0 == gamma).expect("target is a 5-cycle");
        (t.1, t.2)
    }

    /// Emit a program of exactly `4^depth` instructions whose product is
    /// `gamma` when `f` holds and the identity otherwise.
    fn emit(&self, f: &Formula, gamma: Perm5, depth: usize, out: &mut Vec<RawInstr>) {
        match f {
            Formula::Var(i) => {
                out.push(RawInstr { var: Some(*i), perms: [Perm5::IDENTITY, gamma] });
                let pad = 4usize.pow(depth as u32) - 1;
                out.extend(core::iter::repeat(RawInstr::free(Perm5::IDENTITY)).take(pad));
            }
            Formula::Not(g) => {
                let start = out.len();
                self.emit(g, gamma.inverse(), depth, out);
                // the folded instruction is the last non-padding one
                let last = (start..out.len())
                    .rev()
                    .find(|&k| out[k].var.is_some() || !out[k].perms[0].is_identity())
                    .unwrap_or(out.len() - 1);
                out[last].fold_right(gamma);
            }
            Formula::And(a, b) => {
                let (alpha, beta) = self.commutator_pair(gamma);
                self.emit(a, alpha, depth - 1, out);
                self.emit(b, beta, depth - 1, out);
                self.emit(a, alpha.inverse(), depth - 1, out);
                self.emit(b, beta.inverse(), depth - 1, out);
            }
            Formula::Or(a, b) => {
                let dual = Formula::not(Formula::and(Formula::not((**a).clone()), Formula::not((**b).clone())));
                self.emit(&dual, gamma, depth, out);
            }
        }
    }

    /// The pre-ordering program for `f` over `n` inputs, `4^depth(f)` long.
    pub fn compile_raw(&self, f: &Formula, n: usize) -> Result<RawMbp> {
        if f.arity() > n {
            return Err(Error::BadInput(alloc::format!("formula reads x{} but n = {n}", f.arity() - 1)));
        }
        let d = f.depth();
        let length = 4u128.saturating_pow(d as u32).saturating_mul(n.max(1) as u128);
        if length > self.cap {
            return Err(Error::DepthCap { length, cap: self.cap });
        }
        let mut out = Vec::with_capacity(4usize.pow(d as u32));
        self.emit(f, Perm5::CYCLE, d, &mut out);
        Ok(RawMbp { instructions: out, n, q_acc: Perm5::CYCLE, q_rej: Perm5::IDENTITY })
    }

    pub fn compile(&self, f: &Formula, n: usize) -> Result<Mbp> {
        Ok(order_inputs(&self.compile_raw(f, n)?))
    }

    /// Program for a truth table (`table[w]` with `w` read little-endian),
    /// as a concatenation of programs for disjoint cubes covering either
    /// the ones or the zeros, whichever is cheaper.
    pub fn compile_table(&self, table: &Bits, n: usize) -> Result<Mbp> {
        if n > MAX_TABLE_INPUTS {
            return Err(Error::TooLarge { what: "truth table inputs", size: n as u128, limit: MAX_TABLE_INPUTS as u128 });
        }
        if table.len() != 1 << n {
            return Err(Error::BadLength { expected: 1 << n, got: table.len() });
        }
        let ones = disjoint_cubes(table, n, true);
        let zeros = disjoint_cubes(table, n, false);
        let cost = |cubes: &[Vec<(usize, bool)>]| -> u128 {
            cubes.iter().map(|c| 4u128.pow(ceil_log2(c.len().max(1)))).sum::<u128>() * n.max(1) as u128
        };
        let (cubes, complement) =
            if cost(&ones) <= cost(&zeros) + 1 { (ones, false) } else { (zeros, true) };
        let length = cost(&cubes);
        if length > self.cap {
            return Err(Error::CapExceeded { what: "instruction", needed: length, cap: self.cap });
        }
        let gamma = if complement { Perm5::CYCLE.inverse() } else { Perm5::CYCLE };
        let mut out = Vec::new();
        for cube in &cubes {
            match cube.len() {
                0 => out.push(RawInstr::free(gamma)),
                _ => {
                    let lits: Vec<Formula> = cube
                        .iter()
                        .map(|&(v, val)| if val { Formula::Var(v) } else { Formula::not(Formula::Var(v)) })
                        .collect();
                    let f = Formula::balanced(lits, Formula::and).expect("nonempty cube");
                    self.emit(&f, gamma, f.depth(), &mut out);
                }
            }
        }
        if complement {
            out.push(RawInstr::free(Perm5::CYCLE));
        }
        let raw = RawMbp { instructions: out, n, q_acc: Perm5::CYCLE, q_rej: Perm5::IDENTITY };
        Ok(order_inputs(&raw))
    }
}

/// Cubes of a decision tree over `x_0, x_1, …` whose leaves equal `value`.
/// The cubes are pairwise disjoint and cover exactly those inputs.
fn disjoint_cubes(table: &Bits, n: usize, value: bool) -> Vec<Vec<(usize, bool)>> {
    fn rec(table: &Bits, n: usize, var: usize, fixed: u64, value: bool, path: &mut Vec<(usize, bool)>, out: &mut Vec<Vec<(usize, bool)>>) {
        let free = n - var;
        let (mut all, mut none) = (true, true);
        for rest in 0..1u64 << free {
            let w = fixed | rest << var;
            if table.get(w as usize) == value {
                none = false;
            } else {
                all = false;
            }
            if !all && !none {
                break;
            }
        }
        if none {
            return;
        }
        if all {
            out.push(path.clone());
            return;
        }
        for bit in [false, true] {
            path.push((var, bit));
            rec(table, n, var + 1, fixed | (bit as u64) << var, value, path, out);
            path.pop();
        }
    }
    let mut out = Vec::new();
    rec(table, n, 0, 0, value, &mut Vec::new(), &mut out);
    out
}

/// One output of a multi-output function.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum OutputFn {
    Formula(Formula),
    /// `2^inputs` entries indexed by the little-endian input value.
    Table(Bits),
}

/// A multi-output Boolean function over a shared input.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Circuit {
    pub inputs: usize,
    pub outputs: Vec<OutputFn>,
}

impl Circuit {
    pub fn from_formulas(inputs: usize, fs: Vec<Formula>) -> Self {
        Circuit { inputs, outputs: fs.into_iter().map(OutputFn::Formula).collect() }
    }

    /// Tabulate `f` (input and output read as little-endian integers).
    pub fn from_fn(inputs: usize, outputs: usize, f: impl Fn(u64) -> u64) -> Result<Self> {
        if inputs > MAX_TABLE_INPUTS {
            return Err(Error::TooLarge { what: "truth table inputs", size: inputs as u128, limit: MAX_TABLE_INPUTS as u128 });
        }
        let values: Vec<u64> = (0..1u64 << inputs).map(&f).collect();
        let outputs = (0..outputs)
            .map(|k| OutputFn::Table(Bits::from_fn(1 << inputs, |w| values[w] >> k & 1 == 1)))
            .collect();
        Ok(Circuit { inputs, outputs })
    }

    /// Tabulate `f` with outputs of any width.
    pub fn from_fn_bits(inputs: usize, outputs: usize, f: impl Fn(u64) -> Bits) -> Result<Self> {
        if inputs > MAX_TABLE_INPUTS {
            return Err(Error::TooLarge { what: "truth table inputs", size: inputs as u128, limit: MAX_TABLE_INPUTS as u128 });
        }
        let values: Vec<Bits> = (0..1u64 << inputs).map(&f).collect();
        if let Some(v) = values.iter().find(|v| v.len() != outputs) {
            return Err(Error::BadLength { expected: outputs, got: v.len() });
        }
        let outputs = (0..outputs)
            .map(|k| OutputFn::Table(Bits::from_fn(1 << inputs, |w| values[w].get(k))))
            .collect();
        Ok(Circuit { inputs, outputs })
    }

    pub fn eval(&self, w: &Bits) -> Bits {
        assert_eq!(w.len(), self.inputs);
        let idx = if self.inputs <= 64 { w.iter().enumerate().fold(0u64, |a, (i, b)| a | (b as u64) << i) } else { 0 };
        Bits::from_fn(self.outputs.len(), |k| match &self.outputs[k] {
            OutputFn::Formula(f) => f.eval(w),
            OutputFn::Table(t) => t.get(idx as usize),
        })
    }

    /// Compile each output to an ordered program.
    pub fn compile(&self, b: &Barrington) -> Result<Vec<Mbp>> {
        self.outputs
            .iter()
            .map(|o| match o {
                OutputFn::Formula(f) => b.compile(f, self.inputs),
                OutputFn::Table(t) => b.compile_table(t, self.inputs),
            })
            .collect()
    }
}

/// Human-readable program size report.
pub fn describe(p: &Mbp) -> String {
    alloc::format!("MBP N={} n={} q_acc={:?} q_rej={:?}", p.len(), p.n, p.q_acc, p.q_rej)
}

/// Identity program of `len` instructions over `n` inputs; rejects everything.
pub fn identity_program(n: usize, len: usize) -> Mbp {
    Mbp { instructions: vec![[Perm5::IDENTITY; 2]; len], n, q_acc: Perm5::CYCLE, q_rej: Perm5::IDENTITY }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn truth_check(f: &Formula, n: usize, p: &Mbp) {
        for w in 0..1u64 << n {
            let w = Bits::from_u64(w, n);
            assert_eq!(mbp_eval(p, &w).unwrap().bit(), Some(f.eval(&w)), "{f} at {w:?}");
        }
    }

    #[test]
    fn spec_examples() {
        let b = Barrington::new();
        let x0 = Formula::var(0);
        let p = b.compile(&x0, 1).unwrap();
        assert_eq!(p.len(), 1);
        truth_check(&x0, 1, &p);
        let nx0 = Formula::not(x0);
        truth_check(&nx0, 1, &b.compile(&nx0, 1).unwrap());
        let f = Formula::parse("(x0 & x1) | !x2").unwrap();
        truth_check(&f, 3, &b.compile(&f, 3).unwrap());
        let single = Mbp { instructions: vec![[Perm5::IDENTITY, Perm5::CYCLE]], n: 1, q_acc: Perm5::CYCLE, q_rej: Perm5::IDENTITY };
        assert_eq!(mbp_eval(&single, &Bits::from_bit_str("1").unwrap()).unwrap(), BpOutput::One);
        assert_eq!(mbp_eval(&identity_program(2, 4), &Bits::from_bit_str("11").unwrap()).unwrap(), BpOutput::Zero);
    }

    #[test]
    fn parser_round_trip() {
        let f = Formula::parse("x0 & (x1 | !x2)").unwrap();
        assert_eq!(Formula::parse(&alloc::format!("{f}")).unwrap(), f);
        assert!(Formula::parse("x0 &").is_err());
        assert!(Formula::parse("y1").is_err());
    }

    #[test]
    fn depth_cap_refuses() {
        let b = Barrington::with_cap(63);
        let f = Formula::parse("(x0 & x1) & (x2 & x3)").unwrap();
        assert!(matches!(b.compile(&f, 4), Err(Error::DepthCap { .. })));
    }

    #[test]
    fn table_compiler_matches() {
        let b = Barrington::new();
        for n in 1..=4usize {
            for seed in 0..20u64 {
                let table = Bits::from_fn(1 << n, |w| (w as u64).wrapping_mul(0x9e37_79b9).wrapping_add(seed * 77) >> 5 & 1 == 1);
                let p = b.compile_table(&table, n).unwrap();
                for w in 0..1u64 << n {
                    let out = mbp_eval(&p, &Bits::from_u64(w, n)).unwrap();
                    assert_eq!(out.bit(), Some(table.get(w as usize)));
                }
            }
        }
    }
}

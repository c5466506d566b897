//! Compile a checked GCL model to a `TransitionSystem`.
//!
//! A state is the tuple of variable values packed into fixed-width bytes:
//! each variable takes the minimal number of bytes holding its range
//! (values stored as offsets from the lower bound, big-endian), fields
//! concatenated in declaration order. Variable layouts and command tables
//! are precomputed here so successor generation is table-driven.

use super::ast::*;
use super::{sema, GclError};
use crate::model::pack::{bytes_for_span, read_field, write_field};
use crate::model::{EncodedState, ModelError, TransitionSystem};

#[derive(Debug, Clone)]
struct VarLayout {
    name: String,
    lo: i64,
    hi: i64,
    offset: usize,
    width: usize,
}

#[derive(Debug, Clone)]
struct CompiledUpdate {
    var_index: usize,
    expr: Expr,
}

#[derive(Debug, Clone)]
struct CompiledCommand {
    guard: Expr,
    updates: Vec<CompiledUpdate>,
}

/// Arithmetic fault during evaluation; the enclosing command is disabled.
enum EvalFault {
    DivByZero,
    Overflow,
}

/// A compiled GCL model.
pub struct GclSystem {
    layout: Vec<VarLayout>,
    width: usize,
    initial: Vec<i64>,
    commands: Vec<CompiledCommand>,
    accept: Option<Expr>,
}

/// Compile a model. Re-runs the semantic checks so hand-built ASTs cannot
/// bypass them.
pub fn compile(model: &GclModel) -> Result<GclSystem, GclError> {
    sema::check(model)?;
    let mut layout = Vec::with_capacity(model.vars.len());
    let mut offset = 0usize;
    for v in &model.vars {
        let span = (v.hi as i128 - v.lo as i128) as u128;
        let width = bytes_for_span(span.min(u64::MAX as u128) as u64);
        layout.push(VarLayout {
            name: v.name.clone(),
            lo: v.lo,
            hi: v.hi,
            offset,
            width,
        });
        offset += width;
    }

    let var_index = |name: &str| -> usize {
        layout
            .iter()
            .position(|l| l.name == name)
            .expect("sema guarantees declared variables")
    };

    let mut commands = Vec::new();
    for p in &model.procs {
        for c in &p.commands {
            commands.push(CompiledCommand {
                guard: c.guard.clone(),
                updates: c
                    .updates
                    .iter()
                    .map(|u| CompiledUpdate {
                        var_index: var_index(&u.var),
                        expr: u.expr.clone(),
                    })
                    .collect(),
            });
        }
    }

    Ok(GclSystem {
        width: offset.max(1),
        initial: model.vars.iter().map(|v| v.init).collect(),
        layout,
        commands,
        accept: model.accept.clone(),
    })
}

impl GclSystem {
    pub fn variable_names(&self) -> Vec<&str> {
        self.layout.iter().map(|l| l.name.as_str()).collect()
    }

    fn encode(&self, vals: &[i64]) -> EncodedState {
        let mut buf = Vec::with_capacity(self.width);
        for (layout, &v) in self.layout.iter().zip(vals) {
            debug_assert!(v >= layout.lo && v <= layout.hi);
            write_field(&mut buf, (v as i128 - layout.lo as i128) as u64, layout.width);
        }
        if buf.is_empty() {
            buf.push(0);
        }
        EncodedState::new(buf)
    }

    fn decode(&self, state: &EncodedState) -> Result<Vec<i64>, ModelError> {
        let bytes = state.as_bytes();
        if bytes.len() != self.width {
            return Err(ModelError::MalformedState(format!(
                "expected {} bytes, got {}",
                self.width,
                bytes.len()
            )));
        }
        let mut vals = Vec::with_capacity(self.layout.len());
        for layout in &self.layout {
            let raw = read_field(bytes, layout.offset, layout.width);
            let value = layout.lo as i128 + raw as i128;
            if value > layout.hi as i128 {
                return Err(ModelError::MalformedState(format!(
                    "field `{}` value {} outside {}..{}",
                    layout.name, value, layout.lo, layout.hi
                )));
            }
            vals.push(value as i64);
        }
        Ok(vals)
    }

    fn eval(&self, expr: &Expr, vals: &[i64]) -> Result<i64, EvalFault> {
        match &expr.kind {
            ExprKind::Int(v) => Ok(*v),
            ExprKind::Var(name) => {
                let idx = self
                    .layout
                    .iter()
                    .position(|l| &l.name == name)
                    .expect("sema guarantees declared variables");
                Ok(vals[idx])
            }
            ExprKind::Unary(op, inner) => {
                let v = self.eval(inner, vals)?;
                match op {
                    UnOp::Neg => v.checked_neg().ok_or(EvalFault::Overflow),
                    UnOp::Not => Ok((v == 0) as i64),
                }
            }
            ExprKind::Binary(op, lhs, rhs) => {
                let l = self.eval(lhs, vals)?;
                // Short-circuit logical operators.
                match op {
                    BinOp::And if l == 0 => return Ok(0),
                    BinOp::Or if l != 0 => return Ok(1),
                    _ => {}
                }
                let r = self.eval(rhs, vals)?;
                match op {
                    BinOp::Add => l.checked_add(r).ok_or(EvalFault::Overflow),
                    BinOp::Sub => l.checked_sub(r).ok_or(EvalFault::Overflow),
                    BinOp::Mul => l.checked_mul(r).ok_or(EvalFault::Overflow),
                    BinOp::Div => {
                        if r == 0 {
                            Err(EvalFault::DivByZero)
                        } else {
                            l.checked_div(r).ok_or(EvalFault::Overflow)
                        }
                    }
                    BinOp::Mod => {
                        if r == 0 {
                            Err(EvalFault::DivByZero)
                        } else {
                            l.checked_rem(r).ok_or(EvalFault::Overflow)
                        }
                    }
                    BinOp::Eq => Ok((l == r) as i64),
                    BinOp::Ne => Ok((l != r) as i64),
                    BinOp::Lt => Ok((l < r) as i64),
                    BinOp::Le => Ok((l <= r) as i64),
                    BinOp::Gt => Ok((l > r) as i64),
                    BinOp::Ge => Ok((l >= r) as i64),
                    BinOp::And => Ok((r != 0) as i64),
                    BinOp::Or => Ok((r != 0) as i64),
                }
            }
        }
    }
}

impl TransitionSystem for GclSystem {
    fn state_width(&self) -> usize {
        self.width
    }

    fn initial_states(&self) -> Vec<EncodedState> {
        vec![self.encode(&self.initial)]
    }

    fn successors(&self, state: &EncodedState) -> Result<Vec<EncodedState>, ModelError> {
        let vals = self.decode(state)?;
        let mut out = Vec::new();
        'commands: for cmd in &self.commands {
            match self.eval(&cmd.guard, &vals) {
                Ok(0) | Err(_) => continue, // guard false or faulted: disabled
                Ok(_) => {}
            }
            // Atomic update: all right-hand sides evaluate in the pre-state.
            let mut next = vals.clone();
            let mut staged = Vec::with_capacity(cmd.updates.len());
            for u in &cmd.updates {
                match self.eval(&u.expr, &vals) {
                    Ok(v) => staged.push((u.var_index, v)),
                    Err(_) => continue 'commands,
                }
            }
            for (idx, v) in staged {
                let layout = &self.layout[idx];
                if v < layout.lo || v > layout.hi {
                    continue 'commands; // out-of-bounds update: disabled
                }
                next[idx] = v;
            }
            out.push(self.encode(&next));
        }
        Ok(out)
    }

    fn is_accepting(&self, state: &EncodedState) -> Result<bool, ModelError> {
        let vals = self.decode(state)?;
        Ok(match &self.accept {
            None => false,
            Some(expr) => matches!(self.eval(expr, &vals), Ok(v) if v != 0),
        })
    }

    fn recode(&self, state: &EncodedState) -> Result<EncodedState, ModelError> {
        Ok(self.encode(&self.decode(state)?))
    }

    fn describe(&self, state: &EncodedState) -> Result<String, ModelError> {
        let vals = self.decode(state)?;
        Ok(self
            .layout
            .iter()
            .zip(&vals)
            .map(|(l, v)| format!("{}={v}", l.name))
            .collect::<Vec<_>>()
            .join(" "))
    }
}

#[cfg(test)]
mod tests {
    use super::super::parse;
    use super::*;
    use std::collections::HashSet;

    fn system(text: &str) -> GclSystem {
        compile(&parse(text).unwrap()).unwrap()
    }

    fn enumerate(sys: &GclSystem) -> (HashSet<EncodedState>, u64) {
        let mut seen = HashSet::new();
        let mut stack = sys.initial_states();
        let mut transitions = 0;
        while let Some(s) = stack.pop() {
            if !seen.insert(s.clone()) {
                continue;
            }
            // Every reachable state must decode cleanly and stay in bounds.
            assert_eq!(sys.recode(&s).unwrap(), s);
            let succs = sys.successors(&s).unwrap();
            transitions += succs.len() as u64;
            stack.extend(succs);
        }
        (seen, transitions)
    }

    #[test]
    fn minimal_model_has_two_states_one_transition() {
        let sys = system("var x:0..1=0; proc P { x==0 -> x:=1 } accept x==1");
        let (states, transitions) = enumerate(&sys);
        assert_eq!(states.len(), 2);
        assert_eq!(transitions, 1);
        let accepting: Vec<_> = states
            .iter()
            .filter(|s| sys.is_accepting(s).unwrap())
            .collect();
        assert_eq!(accepting.len(), 1);
        assert_eq!(sys.describe(accepting[0]).unwrap(), "x=1");
    }

    #[test]
    fn two_processes_merge_in_process_order() {
        let sys = system(
            "var x: 0..2 = 0;
             proc A { x < 2 -> x := x + 1 }
             proc B { x < 2 -> x := x + 1 }",
        );
        let (states, _) = enumerate(&sys);
        assert_eq!(states.len(), 3);
        // Both processes enabled at x=0: successor list is [1, 1].
        let init = sys.initial_states().pop().unwrap();
        let succs = sys.successors(&init).unwrap();
        assert_eq!(succs.len(), 2);
        assert_eq!(succs[0], succs[1]);
    }

    #[test]
    fn out_of_bounds_update_disables_command() {
        let sys = system("var x: 0..1 = 1; proc P { x >= 0 -> x := x + 1 }");
        let init = sys.initial_states().pop().unwrap();
        assert!(sys.successors(&init).unwrap().is_empty());
    }

    #[test]
    fn division_by_zero_disables_command() {
        let sys = system(
            "var x: 0..3 = 0;
             proc P { 1 / x == 1 -> x := 2; x == 0 -> x := 1 }",
        );
        let init = sys.initial_states().pop().unwrap();
        // Only the second command fires at x=0.
        let succs = sys.successors(&init).unwrap();
        assert_eq!(succs.len(), 1);
        assert_eq!(sys.describe(&succs[0]).unwrap(), "x=1");
    }

    #[test]
    fn faulting_accept_is_not_accepting() {
        let sys = system("var x: 0..1 = 0; accept 1 / x == 1");
        let init = sys.initial_states().pop().unwrap();
        assert!(!sys.is_accepting(&init).unwrap());
    }

    #[test]
    fn negative_ranges_roundtrip() {
        let sys = system("var t: -3..3 = -2; proc P { t < 3 -> t := t + 1 }");
        let (states, _) = enumerate(&sys);
        assert_eq!(states.len(), 6); // -2..=3
        for s in &states {
            assert_eq!(sys.recode(s).unwrap(), *s);
        }
    }

    #[test]
    fn decode_rejects_wrong_length_and_out_of_domain() {
        let sys = system("var x: 0..2 = 0;");
        assert!(matches!(
            sys.recode(&EncodedState::new(vec![0u8, 0])),
            Err(ModelError::MalformedState(_))
        ));
        // Width is 1 byte but only 0..=2 is a valid field value.
        assert!(matches!(
            sys.recode(&EncodedState::new(vec![7u8])),
            Err(ModelError::MalformedState(_))
        ));
    }

    #[test]
    fn compile_is_deterministic() {
        let text = "var a: 0..5 = 2; var b: 0..300 = 7;
                    proc P { a > 0 -> a := a - 1, b := b + a }
                    accept a == 0 && b > 8";
        let s1 = system(text);
        let s2 = system(text);
        assert_eq!(s1.initial_states(), s2.initial_states());
        let mut stack = s1.initial_states();
        let mut seen = HashSet::new();
        while let Some(s) = stack.pop() {
            if !seen.insert(s.clone()) {
                continue;
            }
            assert_eq!(s1.successors(&s).unwrap(), s2.successors(&s).unwrap());
            stack.extend(s1.successors(&s).unwrap());
        }
    }

    #[test]
    fn multibyte_variables_pack_big_endian() {
        let sys = system("var big: 0..70000 = 70000;");
        let init = sys.initial_states().pop().unwrap();
        assert_eq!(init.as_bytes().len(), 3);
        assert_eq!(init.as_bytes(), &[0x01, 0x11, 0x70]); // 70000 = 0x011170
    }
}

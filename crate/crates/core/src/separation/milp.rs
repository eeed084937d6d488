//! Export of the separation integer program in CPLEX LP text format.
//!
//! Variables:
//! - `s_k_j` (binary): sign of mode `k`, coordinate `j`, both one-based, with
//!   `θ = 2 s − 1`.
//! - `y_F_k` (continuous in `[-1, 1]`): chain value `Π_{i ≥ k} θ^(i)_{x_i}` for
//!   the entry with zero-based row-major flat index `F`, `k` one-based.
//!
//! For every supported entry `x` and `k < p` the chain link
//! `y_{x,k} = θ_{x_k} · y_{x,k+1}` is linearized by four inequalities (named
//! `a`..`d` below, shown after substituting `θ = 2s − 1`):
//!
//! ```text
//! a: y_{x,k} ≥ −θ − y_{x,k+1} − 1   ⇔  y_{x,k} + 2 s + y_{x,k+1} ≥ 0
//! b: y_{x,k} ≥  θ + y_{x,k+1} − 1   ⇔  y_{x,k} − 2 s − y_{x,k+1} ≥ −2
//! c: y_{x,k} ≤  θ − y_{x,k+1} + 1   ⇔  y_{x,k} − 2 s + y_{x,k+1} ≤ 0
//! d: y_{x,k} ≤ −θ + y_{x,k+1} + 1   ⇔  y_{x,k} + 2 s − y_{x,k+1} ≤ 2
//! ```
//!
//! and the chain ends with `y_{x,p} − 2 s = −1`. The objective is
//! `max Σ c_x ψ_x − λ Σ c_x y_{x,1}`, the constant written as a trailing
//! objective term. Only entries with nonzero `c_x` are instantiated. Output is
//! deterministic for a given request.

use alloc::string::String;
use core::fmt::{self, Write};

use super::SeparationRequest;

const TERMS_PER_LINE: usize = 6;

/// Renders the integer program as LP text.
pub fn export_milp(req: &SeparationRequest) -> String {
    let mut out = String::new();
    write_milp(req, &mut out).expect("writing to a String cannot fail");
    out
}

/// Streams the integer program as LP text into `w`.
pub fn write_milp<W: Write>(req: &SeparationRequest, w: &mut W) -> fmt::Result {
    let terms = req.terms();
    let shape = req.shape();
    let p = terms.order;
    let lambda = req.lambda();
    let flat: alloc::vec::Vec<u64> = terms
        .source
        .iter()
        .map(|&i| shape.flat(&req.indices()[i]))
        .collect();

    writeln!(w, "\\ sign-vertex separation problem")?;
    writeln!(w, "\\ shape {shape}, lambda {lambda}, {} supported entries", terms.len())?;
    writeln!(w, "\\ theta_k_j = 2 s_k_j - 1; y_F_k chains over flat index F (zero-based, row-major)")?;
    writeln!(w, "Maximize")?;
    write!(w, " obj:")?;
    let mut line_terms = 0;
    for (t, &c) in terms.coef.iter().enumerate() {
        let coef = -lambda * c;
        if coef == 0.0 {
            continue;
        }
        if line_terms == TERMS_PER_LINE {
            write!(w, "\n     ")?;
            line_terms = 0;
        }
        write_term(w, coef, format_args!("y_{}_1", flat[t]))?;
        line_terms += 1;
    }
    let constant = terms.inner;
    if constant != 0.0 || terms.len() == 0 {
        write!(w, " {} {}", sign(constant), fmt_num(constant.abs()))?;
    }
    writeln!(w)?;

    writeln!(w, "Subject To")?;
    for t in 0..terms.len() {
        let f = flat[t];
        let x = terms.term_coords(t);
        for k in 1..p {
            let s = Var::Sign(k, x[k - 1] as usize + 1);
            let (y, yn) = (Var::Chain(f, k), Var::Chain(f, k + 1));
            writeln!(w, " l_{f}_{k}_a: {y} + 2 {s} + {yn} >= 0")?;
            writeln!(w, " l_{f}_{k}_b: {y} - 2 {s} - {yn} >= -2")?;
            writeln!(w, " l_{f}_{k}_c: {y} - 2 {s} + {yn} <= 0")?;
            writeln!(w, " l_{f}_{k}_d: {y} + 2 {s} - {yn} <= 2")?;
        }
        let s = Var::Sign(p, x[p - 1] as usize + 1);
        writeln!(w, " e_{f}: {} - 2 {s} = -1", Var::Chain(f, p))?;
    }

    writeln!(w, "Bounds")?;
    for t in 0..terms.len() {
        for k in 1..=p {
            writeln!(w, " -1 <= {} <= 1", Var::Chain(flat[t], k))?;
        }
    }

    writeln!(w, "Binaries")?;
    for k in 0..p {
        let used = (0..terms.dims[k]).filter(|&j| !terms.incidence[terms.offset[k] + j].is_empty());
        for j in used {
            writeln!(w, " {}", Var::Sign(k + 1, j + 1))?;
        }
    }
    writeln!(w, "End")
}

enum Var {
    Sign(usize, usize),
    Chain(u64, usize),
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Var::Sign(k, j) => write!(f, "s_{k}_{j}"),
            Var::Chain(flat, k) => write!(f, "y_{flat}_{k}"),
        }
    }
}

fn sign(v: f64) -> char {
    if v < 0.0 {
        '-'
    } else {
        '+'
    }
}

fn write_term<W: Write>(w: &mut W, coef: f64, var: fmt::Arguments<'_>) -> fmt::Result {
    write!(w, " {} {} {}", sign(coef), fmt_num(coef.abs()), var)
}

/// Shortest round-trip decimal, in plain or `e` notation as `{:?}` chooses.
fn fmt_num(v: f64) -> impl fmt::Display {
    struct Num(f64);
    impl fmt::Display for Num {
        fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
            if self.0.abs() < 1e15 && self.0 == (self.0 as i64) as f64 {
                write!(f, "{}", self.0 as i64)
            } else {
                write!(f, "{:?}", self.0)
            }
        }
    }
    Num(v)
}

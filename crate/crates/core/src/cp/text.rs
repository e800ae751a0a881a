//! Line-oriented proof format.
//!
//! ```text
//! cpproof mode=refutation rules=syntactic shape=dag
//! ax 0
//! vlo 3
//! lin 0 1 2 1
//! sem 0 1 : 1*x0 -1*x1 >= 0
//! ```

use std::fmt::Write as _;

use num_bigint::BigInt;

use super::{CpError, CpProof, LinearInequality, ProofMode, Rules, Shape, Step};

impl CpProof {
    pub fn to_text(&self) -> String {
        let mode = match self.mode {
            ProofMode::Refutation => "refutation",
            ProofMode::Derivation(_) => "derivation",
        };
        let rules = match self.rules {
            Rules::Syntactic => "syntactic",
            Rules::Semantic => "semantic",
        };
        let shape = match self.shape {
            Shape::Dag => "dag",
            Shape::Tree => "tree",
        };
        let mut s = format!("cpproof mode={mode} rules={rules} shape={shape}\n");
        if let ProofMode::Derivation(t) = &self.mode {
            let _ = writeln!(s, "target {t}");
        }
        for step in &self.steps {
            let _ = match step {
                Step::ClauseAxiom(k) => writeln!(s, "ax {k}"),
                Step::RawAxiom(a) => writeln!(s, "raw {a}"),
                Step::VarLo(v) => writeln!(s, "vlo {v}"),
                Step::VarHi(v) => writeln!(s, "vhi {v}"),
                Step::Lin { i, j, c, d } => writeln!(s, "lin {i} {j} {c} {d}"),
                Step::Div { i, c } => writeln!(s, "div {i} {c}"),
                Step::Sem { premises, conclusion } => {
                    let ps: Vec<String> = premises.iter().map(|p| p.to_string()).collect();
                    writeln!(s, "sem {} : {conclusion}", ps.join(" "))
                }
                Step::Del(i) => writeln!(s, "del {i}"),
            };
        }
        s
    }

    pub fn parse(text: &str) -> Result<CpProof, CpError> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
        let (hl, header) = lines.next().ok_or(CpError::Parse { line: 0, msg: "empty proof".into() })?;
        let err = |line: usize, msg: String| CpError::Parse { line, msg };
        let toks: Vec<&str> = header.split_whitespace().collect();
        let ["cpproof", mode, rules, shape] = toks.as_slice() else {
            return Err(err(hl, "expected 'cpproof mode=.. rules=.. shape=..'".into()));
        };
        let derivation = match *mode {
            "mode=refutation" => false,
            "mode=derivation" => true,
            _ => return Err(err(hl, format!("bad {mode}"))),
        };
        let rules = match *rules {
            "rules=syntactic" => Rules::Syntactic,
            "rules=semantic" => Rules::Semantic,
            _ => return Err(err(hl, format!("bad {rules}"))),
        };
        let shape = match *shape {
            "shape=dag" => Shape::Dag,
            "shape=tree" => Shape::Tree,
            _ => return Err(err(hl, format!("bad {shape}"))),
        };
        let mut target = None;
        let mut steps = Vec::new();
        for (ln, line) in lines {
            let (op, rest) = line.split_once(' ').unwrap_or((line, ""));
            let rest = rest.trim();
            let ineq = |s: &str| LinearInequality::parse(s).map_err(|m| err(ln, m));
            let nums = || -> Result<Vec<BigInt>, CpError> {
                rest.split_whitespace().map(|t| t.parse::<BigInt>().map_err(|_| err(ln, format!("bad number '{t}'")))).collect()
            };
            let idx = |b: &BigInt| -> Result<usize, CpError> { usize::try_from(b).map_err(|_| err(ln, format!("bad index '{b}'"))) };
            let step = match op {
                "target" if steps.is_empty() && target.is_none() => {
                    target = Some(ineq(rest)?);
                    continue;
                }
                "raw" => Step::RawAxiom(ineq(rest)?),
                "sem" => {
                    let (ps, concl) = rest.split_once(':').ok_or_else(|| err(ln, "sem needs ':'".into()))?;
                    let premises = ps
                        .split_whitespace()
                        .map(|t| t.parse::<usize>().map_err(|_| err(ln, format!("bad index '{t}'"))))
                        .collect::<Result<Vec<_>, _>>()?;
                    Step::Sem { premises, conclusion: ineq(concl.trim())? }
                }
                _ => {
                    let n = nums()?;
                    match (op, n.as_slice()) {
                        ("ax", [k]) => Step::ClauseAxiom(idx(k)?),
                        ("vlo", [v]) => Step::VarLo(idx(v)?),
                        ("vhi", [v]) => Step::VarHi(idx(v)?),
                        ("lin", [i, j, c, d]) => Step::Lin { i: idx(i)?, j: idx(j)?, c: c.clone(), d: d.clone() },
                        ("div", [i, c]) => Step::Div { i: idx(i)?, c: c.clone() },
                        ("del", [i]) => Step::Del(idx(i)?),
                        _ => return Err(err(ln, format!("unrecognised step '{line}'"))),
                    }
                }
            };
            steps.push(step);
        }
        let mode = match (derivation, target) {
            (false, None) => ProofMode::Refutation,
            (true, Some(t)) => ProofMode::Derivation(t),
            (true, None) => return Err(err(hl, "derivation without target".into())),
            (false, Some(_)) => return Err(err(hl, "target given for a refutation".into())),
        };
        Ok(CpProof { mode, rules, shape, steps })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let p = CpProof {
            mode: ProofMode::Derivation(LinearInequality::from_i64(&[(0, 1)], 1)),
            rules: Rules::Semantic,
            shape: Shape::Tree,
            steps: vec![
                Step::ClauseAxiom(0),
                Step::RawAxiom(LinearInequality::from_i64(&[(0, 2), (1, -3)], -1)),
                Step::VarLo(1),
                Step::VarHi(1),
                Step::Lin { i: 0, j: 1, c: 3.into(), d: 0.into() },
                Step::Div { i: 4, c: 3.into() },
                Step::Sem { premises: vec![0, 1], conclusion: LinearInequality::from_i64(&[(0, 1)], 1) },
                Step::Sem { premises: vec![], conclusion: LinearInequality::from_i64(&[(0, 1)], 0) },
                Step::Del(2),
            ],
        };
        assert_eq!(CpProof::parse(&p.to_text()).unwrap(), p);
        assert!(CpProof::parse("cpproof mode=refutation rules=syntactic shape=dag\nfoo 1\n").is_err());
    }
}

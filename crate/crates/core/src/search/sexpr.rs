//! Minimal s-expressions for tree serialization.

use super::SearchError;

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) enum Sexpr {
    Atom(String),
    List(Vec<Sexpr>),
}

impl Sexpr {
    pub(crate) fn parse(text: &str) -> Result<Sexpr, SearchError> {
        let spaced = text.replace('(', " ( ").replace(')', " ) ");
        let tokens: Vec<&str> = spaced.split_whitespace().collect();
        let mut pos = 0;
        let e = read(&tokens, &mut pos)?;
        if let Some(t) = tokens.get(pos) {
            return Err(SearchError::Parse(format!("trailing token '{t}'")));
        }
        Ok(e)
    }

    pub(crate) fn atom(&self) -> Option<&str> {
        match self {
            Sexpr::Atom(a) => Some(a),
            Sexpr::List(_) => None,
        }
    }
}

fn read(tokens: &[&str], pos: &mut usize) -> Result<Sexpr, SearchError> {
    let t = *tokens.get(*pos).ok_or_else(|| SearchError::Parse("unexpected end of input".into()))?;
    *pos += 1;
    match t {
        ")" => Err(SearchError::Parse("unexpected ')'".into())),
        "(" => {
            let mut items = Vec::new();
            loop {
                match tokens.get(*pos) {
                    None => return Err(SearchError::Parse("missing ')'".into())),
                    Some(&")") => {
                        *pos += 1;
                        return Ok(Sexpr::List(items));
                    }
                    Some(_) => items.push(read(tokens, pos)?),
                }
            }
        }
        a => Ok(Sexpr::Atom(a.to_string())),
    }
}

/// Split `(tag a b … (0 X) (1 Y))` into its atoms and the two branch bodies.
pub(crate) fn branches(items: &[Sexpr]) -> Result<(&Sexpr, &Sexpr), SearchError> {
    fn branch<'a>(e: &'a Sexpr, label: &str) -> Result<&'a Sexpr, SearchError> {
        match e {
            Sexpr::List(v) if v.len() == 2 && v[0].atom() == Some(label) => Ok(&v[1]),
            _ => Err(SearchError::Parse(format!("expected a ({label} …) branch"))),
        }
    }
    match items {
        [.., a, b] => Ok((branch(a, "0")?, branch(b, "1")?)),
        _ => Err(SearchError::Parse("node needs two branches".into())),
    }
}

pub(crate) fn number<T: std::str::FromStr>(e: &Sexpr, what: &str) -> Result<T, SearchError> {
    e.atom()
        .and_then(|a| a.parse().ok())
        .ok_or_else(|| SearchError::Parse(format!("bad {what}")))
}

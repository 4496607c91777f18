//! Minimal s-expression reader for solver responses.

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Sexp {
    Atom(String),
    List(Vec<Sexp>),
}

impl Sexp {
    pub fn as_atom(&self) -> Option<&str> {
        match self {
            Sexp::Atom(a) => Some(a),
            Sexp::List(_) => None,
        }
    }

    pub fn as_list(&self) -> Option<&[Sexp]> {
        match self {
            Sexp::List(l) => Some(l),
            Sexp::Atom(_) => None,
        }
    }

    /// Integer literal, including the `(- n)` form.
    pub fn as_int(&self) -> Option<i64> {
        match self {
            Sexp::Atom(a) => a.parse().ok(),
            Sexp::List(l) => match l.as_slice() {
                [Sexp::Atom(minus), n] if minus == "-" => n.as_int().map(|v| -v),
                _ => None,
            },
        }
    }
}

/// Net parenthesis depth of `text`, ignoring string literals and `|quoted|`
/// symbols.
pub fn depth_delta(text: &str) -> i64 {
    let mut depth = 0;
    let mut in_str = false;
    let mut in_sym = false;
    for c in text.chars() {
        match c {
            '"' if !in_sym => in_str = !in_str,
            '|' if !in_str => in_sym = !in_sym,
            '(' if !in_str && !in_sym => depth += 1,
            ')' if !in_str && !in_sym => depth -= 1,
            _ => {}
        }
    }
    depth
}

pub fn parse(text: &str) -> Result<Sexp, String> {
    let mut tokens = tokenize(text).into_iter().peekable();
    let e = read(&mut tokens)?;
    if tokens.next().is_some() {
        return Err("trailing tokens".into());
    }
    Ok(e)
}

fn tokenize(text: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut cur = String::new();
    let mut chars = text.chars().peekable();
    while let Some(c) = chars.next() {
        match c {
            '(' | ')' => {
                if !cur.is_empty() {
                    out.push(std::mem::take(&mut cur));
                }
                out.push(c.to_string());
            }
            '|' | '"' => {
                cur.push(c);
                for d in chars.by_ref() {
                    cur.push(d);
                    if d == c {
                        break;
                    }
                }
            }
            c if c.is_whitespace() => {
                if !cur.is_empty() {
                    out.push(std::mem::take(&mut cur));
                }
            }
            c => cur.push(c),
        }
    }
    if !cur.is_empty() {
        out.push(cur);
    }
    out
}

fn read(tokens: &mut std::iter::Peekable<std::vec::IntoIter<String>>) -> Result<Sexp, String> {
    match tokens.next() {
        None => Err("unexpected end of input".into()),
        Some(t) if t == "(" => {
            let mut items = Vec::new();
            loop {
                match tokens.peek().map(String::as_str) {
                    None => return Err("unbalanced parenthesis".into()),
                    Some(")") => {
                        tokens.next();
                        return Ok(Sexp::List(items));
                    }
                    Some(_) => items.push(read(tokens)?),
                }
            }
        }
        Some(t) if t == ")" => Err("unexpected ')'".into()),
        Some(t) => Ok(Sexp::Atom(t)),
    }
}

//! Text formats for transition systems and trace sets.
//!
//! Transition systems (line-based):
//!
//! ```text
//! aps: p1 p2 ...
//! vertex <id> [init] { p,... }
//! edge <from> <to>
//! ```
//!
//! Trace sets: one trace per line, `stem ; loop`, letters written `{p,...}`
//! and separated by spaces, e.g. `{} {x} ; {}`. Blank lines and lines
//! starting with `#` are ignored in both formats.

use std::collections::{BTreeMap, BTreeSet};

use super::{Alphabet, LassoTrace, TraceError, TraceSet, TransitionSystem};

fn err(line: usize, msg: impl Into<String>) -> TraceError {
    TraceError::Parse { line, msg: msg.into() }
}

// Splits the contents of a `{p,...}` letter into proposition names.
fn letter_props(body: &str, line: usize) -> Result<Vec<String>, TraceError> {
    let inner = body.trim();
    if inner.is_empty() {
        return Ok(Vec::new());
    }
    inner
        .split(',')
        .map(|p| {
            let p = p.trim();
            if p.is_empty() {
                Err(err(line, "empty proposition in letter"))
            } else {
                Ok(p.to_string())
            }
        })
        .collect()
}

// Extracts `{...}` letter bodies from whitespace-separated tokens.
fn parse_letter_token(tok: &str, line: usize) -> Result<Vec<String>, TraceError> {
    if let Some(rest) = tok.strip_prefix('{') {
        if let Some(body) = rest.strip_suffix('}') {
            return letter_props(body, line);
        }
    }
    Err(err(line, format!("expected a letter like {{p,q}}, found {tok:?}")))
}

/// Parses one `stem ; loop` trace line over the given alphabet.
pub fn parse_trace_line(
    text: &str,
    alphabet: &Alphabet,
    line: usize,
) -> Result<LassoTrace, TraceError> {
    let mut stem: Vec<u64> = Vec::new();
    let mut lasso: Vec<u64> = Vec::new();
    let mut seen_sep = false;
    for tok in text.split_whitespace() {
        if tok == ";" {
            if seen_sep {
                return Err(err(line, "more than one ';' separator"));
            }
            seen_sep = true;
            continue;
        }
        let props = parse_letter_token(tok, line)?;
        let letter = alphabet.letter(props.iter().map(String::as_str))?;
        if seen_sep {
            lasso.push(letter);
        } else {
            stem.push(letter);
        }
    }
    if !seen_sep {
        return Err(err(line, "missing ';' between stem and loop"));
    }
    if lasso.is_empty() {
        return Err(err(line, "loop must have at least one letter"));
    }
    LassoTrace::new(alphabet.clone(), stem, lasso)
}

fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

/// Parses a trace-set file. With `alphabet = None` the alphabet is inferred
/// as the set of all propositions mentioned in any letter.
pub fn parse_trace_set(text: &str, alphabet: Option<&Alphabet>) -> Result<TraceSet, TraceError> {
    let alphabet = match alphabet {
        Some(a) => a.clone(),
        None => {
            let mut props: BTreeSet<String> = BTreeSet::new();
            for (line, l) in content_lines(text) {
                for tok in l.split_whitespace() {
                    if tok != ";" {
                        props.extend(parse_letter_token(tok, line)?);
                    }
                }
            }
            Alphabet::new(props)?
        }
    };
    let mut out = TraceSet::new(alphabet.clone());
    for (line, l) in content_lines(text) {
        out.insert(parse_trace_line(l, &alphabet, line)?)?;
    }
    Ok(out)
}

/// Parses the transition-system format.
pub fn parse_transition_system(text: &str) -> Result<TransitionSystem, TraceError> {
    let mut alphabet: Option<Alphabet> = None;
    let mut labels: BTreeMap<usize, u64> = BTreeMap::new();
    let mut initial: BTreeSet<usize> = BTreeSet::new();
    let mut edges: BTreeSet<(usize, usize)> = BTreeSet::new();
    for (line, l) in content_lines(text) {
        let mut toks = l.split_whitespace();
        match toks.next() {
            Some("aps:") => {
                if alphabet.is_some() {
                    return Err(err(line, "duplicate aps: line"));
                }
                alphabet = Some(Alphabet::new(toks.map(str::to_string))?);
            }
            Some("vertex") => {
                let alphabet = alphabet
                    .as_ref()
                    .ok_or_else(|| err(line, "aps: line must come first"))?;
                let id: usize = toks
                    .next()
                    .ok_or_else(|| err(line, "vertex needs an id"))?
                    .parse()
                    .map_err(|_| err(line, "vertex id must be a number"))?;
                let rest: Vec<&str> = toks.collect();
                let (is_init, letter_toks) = match rest.split_first() {
                    Some((&"init", tail)) => (true, tail),
                    _ => (false, &rest[..]),
                };
                // The letter may contain internal spaces: rejoin and strip.
                let joined = letter_toks.join(" ");
                let joined = joined.trim();
                let body = joined
                    .strip_prefix('{')
                    .and_then(|r| r.strip_suffix('}'))
                    .ok_or_else(|| err(line, "vertex needs a {p,...} label"))?;
                let props = letter_props(body, line)?;
                let letter = alphabet.letter(props.iter().map(String::as_str))?;
                if labels.insert(id, letter).is_some() {
                    return Err(err(line, format!("duplicate vertex {id}")));
                }
                if is_init {
                    initial.insert(id);
                }
            }
            Some("edge") => {
                let from: usize = toks
                    .next()
                    .ok_or_else(|| err(line, "edge needs two vertex ids"))?
                    .parse()
                    .map_err(|_| err(line, "edge endpoints must be numbers"))?;
                let to: usize = toks
                    .next()
                    .ok_or_else(|| err(line, "edge needs two vertex ids"))?
                    .parse()
                    .map_err(|_| err(line, "edge endpoints must be numbers"))?;
                edges.insert((from, to));
            }
            Some(other) => {
                return Err(err(line, format!("unknown directive {other:?}")));
            }
            None => unreachable!("blank lines filtered"),
        }
    }
    let alphabet = alphabet.ok_or_else(|| err(0, "missing aps: line"))?;
    let n = labels.len();
    let mut label_vec = vec![0u64; n];
    for (id, letter) in labels {
        if id >= n {
            return Err(TraceError::UnknownVertex(id));
        }
        label_vec[id] = letter;
    }
    TransitionSystem::new(alphabet, label_vec, edges, initial)
}

/// Prints a transition system in the parseable text format.
pub fn print_transition_system(ts: &TransitionSystem) -> String {
    let mut out = String::new();
    out.push_str("aps:");
    for p in ts.alphabet().props() {
        out.push(' ');
        out.push_str(p);
    }
    out.push('\n');
    for v in 0..ts.len() {
        let init = if ts.initial().contains(&v) { " init" } else { "" };
        let props = ts.alphabet().letter_props(ts.label(v)).join(",");
        out.push_str(&format!("vertex {v}{init} {{{props}}}\n"));
    }
    for &(u, v) in ts.edges() {
        out.push_str(&format!("edge {u} {v}\n"));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trace_set_round_trip() {
        let text = "{} {x} ; {}\n; {x} {}\n";
        let set = parse_trace_set(text, None).unwrap();
        assert_eq!(set.len(), 2);
        assert_eq!(set.alphabet().props(), ["x".to_string()]);
        let printed = set.to_string();
        let again = parse_trace_set(&printed, Some(set.alphabet())).unwrap();
        assert_eq!(set, again);
    }

    #[test]
    fn trace_set_explicit_alphabet() {
        let alpha = Alphabet::new(["x", "y"]).unwrap();
        let set = parse_trace_set("; {}\n", Some(&alpha)).unwrap();
        assert_eq!(set.alphabet(), &alpha);
    }

    #[test]
    fn trace_line_errors() {
        let alpha = Alphabet::new(["x"]).unwrap();
        assert!(parse_trace_line("{}", &alpha, 1).is_err());
        assert!(parse_trace_line("{} ;", &alpha, 1).is_err());
        assert!(parse_trace_line("{y} ; {}", &alpha, 1).is_err());
        assert!(parse_trace_line("oops ; {}", &alpha, 1).is_err());
    }

    #[test]
    fn transition_system_round_trip() {
        let text = "\
aps: s x
vertex 0 init {x,s}
vertex 1 init {s}
edge 0 0
edge 0 1
edge 1 0
edge 1 1
";
        let ts = parse_transition_system(text).unwrap();
        assert_eq!(ts.len(), 2);
        assert_eq!(ts.initial().len(), 2);
        assert_eq!(ts.edges().len(), 4);
        let printed = print_transition_system(&ts);
        let again = parse_transition_system(&printed).unwrap();
        assert_eq!(ts, again);
    }

    #[test]
    fn transition_system_rejects_dangling_vertex() {
        let text = "aps: x\nvertex 0 {x}\nvertex 1 {}\nedge 0 0\nedge 0 1\n";
        assert!(matches!(
            parse_transition_system(text),
            Err(TraceError::NoOutgoingEdge(1))
        ));
    }

    #[test]
    fn transition_system_comments_and_blanks() {
        let text = "# a system\naps: x\n\nvertex 0 init {}\nedge 0 0\n";
        let ts = parse_transition_system(text).unwrap();
        assert_eq!(ts.len(), 1);
    }
}

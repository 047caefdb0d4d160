//! Value syntax: plain scalars, lists, and calls `name(arg, key=value, …)`.

use std::collections::BTreeMap;
use std::fmt;

/// A parsed call expression. A bare identifier is a call without arguments.
#[derive(Debug, Clone, PartialEq)]
pub struct Expr {
    pub name: String,
    pub positional: Vec<String>,
    pub named: BTreeMap<String, String>,
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.name)?;
        if self.positional.is_empty() && self.named.is_empty() {
            return Ok(());
        }
        let args: Vec<String> = self
            .positional
            .iter()
            .cloned()
            .chain(self.named.iter().map(|(k, v)| format!("{k}={v}")))
            .collect();
        write!(f, "({})", args.join(", "))
    }
}

fn is_ident(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

impl Expr {
    pub fn parse(text: &str) -> Result<Expr, String> {
        let text = text.trim();
        let (name, args) = match text.find('(') {
            None => (text, None),
            Some(open) => {
                if !text.ends_with(')') {
                    return Err(format!("missing `)` in `{text}`"));
                }
                (text[..open].trim(), Some(&text[open + 1..text.len() - 1]))
            }
        };
        if !is_ident(name) {
            return Err(format!("`{name}` is not a valid name"));
        }
        let mut e = Expr {
            name: name.to_string(),
            positional: Vec::new(),
            named: BTreeMap::new(),
        };
        let Some(args) = args else {
            return Ok(e);
        };
        if args.trim().is_empty() {
            return Ok(e);
        }
        for arg in args.split(',') {
            let arg = arg.trim();
            if arg.is_empty() {
                return Err(format!("empty argument in `{text}`"));
            }
            match arg.split_once('=') {
                Some((k, v)) => {
                    let k = k.trim();
                    if !is_ident(k) {
                        return Err(format!("`{k}` is not a valid argument name"));
                    }
                    if e.named.insert(k.to_string(), v.trim().to_string()).is_some() {
                        return Err(format!("argument `{k}` given twice"));
                    }
                }
                None => {
                    if !e.named.is_empty() {
                        return Err(format!("positional argument `{arg}` after named ones"));
                    }
                    e.positional.push(arg.to_string());
                }
            }
        }
        Ok(e)
    }

    /// Numeric argument by name, or by position `pos`, or `default`.
    pub fn num(&self, key: &str, pos: usize, default: Option<f64>) -> Result<f64, String> {
        let raw = self.named.get(key).or_else(|| self.positional.get(pos));
        match raw {
            Some(v) => parse_f64(v).map_err(|e| format!("{}: argument `{key}`: {e}", self.name)),
            None => default.ok_or_else(|| format!("{}: missing argument `{key}`", self.name)),
        }
    }

    /// Fails if an argument outside `allowed` or beyond `allowed.len()`
    /// positions was given.
    pub fn check_args(&self, allowed: &[&str]) -> Result<(), String> {
        if self.positional.len() > allowed.len() {
            return Err(format!(
                "{} takes at most {} arguments, got {}",
                self.name,
                allowed.len(),
                self.positional.len()
            ));
        }
        for k in self.named.keys() {
            if !allowed.contains(&k.as_str()) {
                return Err(format!(
                    "{}: unknown argument `{k}` (expected one of {})",
                    self.name,
                    allowed.join(", ")
                ));
            }
        }
        for (i, a) in allowed.iter().enumerate().take(self.positional.len()) {
            if self.named.contains_key(*a) {
                return Err(format!(
                    "{}: argument `{a}` given by position {i} and by name",
                    self.name
                ));
            }
        }
        Ok(())
    }

    /// Named numeric arguments as a parameter map (positional ones are
    /// mapped onto `order`).
    pub fn params(&self, order: &[&str]) -> Result<BTreeMap<String, f64>, String> {
        self.check_args(order)?;
        let mut out = BTreeMap::new();
        for (k, v) in order.iter().zip(&self.positional) {
            out.insert(k.to_string(), parse_f64(v).map_err(|e| format!("{}: {e}", self.name))?);
        }
        for (k, v) in &self.named {
            out.insert(k.clone(), parse_f64(v).map_err(|e| format!("{}: {e}", self.name))?);
        }
        Ok(out)
    }
}

pub fn parse_f64(s: &str) -> Result<f64, String> {
    let s = s.trim();
    let v = match s {
        "inf" | "+inf" => f64::INFINITY,
        "-inf" => f64::NEG_INFINITY,
        _ => s.parse::<f64>().map_err(|_| format!("`{s}` is not a number"))?,
    };
    if v.is_nan() {
        return Err(format!("`{s}` is not a number"));
    }
    Ok(v)
}

pub fn parse_bool(s: &str) -> Result<bool, String> {
    match s.trim() {
        "true" | "yes" | "on" | "1" => Ok(true),
        "false" | "no" | "off" | "0" => Ok(false),
        other => Err(format!("`{other}` is not a boolean")),
    }
}

/// Comma-separated numbers.
pub fn parse_list(s: &str) -> Result<Vec<f64>, String> {
    s.split(',').map(parse_f64).collect()
}

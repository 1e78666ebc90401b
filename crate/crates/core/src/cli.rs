//! Parameter table and command-line parsing.
//!
//! Every parameter has a name, a description, a typed default and a current
//! value. Parameter records register themselves with an optional prefix
//! modifier that is appended to the name: `cutoff` registered with prefix
//! `P` becomes `--cutoffP`. The command line grammar is `--<name> <value>`
//! pairs, flags standing alone (optionally followed by `true`/`false`), and
//! `--help`.

use std::fmt;
use std::marker::PhantomData;

use indexmap::IndexMap;
use num_complex::Complex64 as C64;

use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub enum ParameterValue {
    Integer(i64),
    Unsigned(u64),
    Real(f64),
    Complex(C64),
    ComplexPair(C64, C64),
    Text(String),
    Token {
        value: String,
        choices: &'static [&'static str],
    },
    Flag(bool),
}

impl ParameterValue {
    /// Human-readable type name used in help output.
    pub fn type_name(&self) -> String {
        match self {
            ParameterValue::Integer(_) => "integer".into(),
            ParameterValue::Unsigned(_) => "unsigned".into(),
            ParameterValue::Real(_) => "real".into(),
            ParameterValue::Complex(_) => "complex".into(),
            ParameterValue::ComplexPair(..) => "complex pair".into(),
            ParameterValue::Text(_) => "text".into(),
            ParameterValue::Token { choices, .. } => format!("one of {}", choices.join("|")),
            ParameterValue::Flag(_) => "flag".into(),
        }
    }

    /// Parses `text` into a value of the same kind as `self`.
    pub fn parse_as(&self, text: &str) -> Result<ParameterValue> {
        let bad = || Error::BadValue {
            token: text.to_string(),
            expected: self.type_name(),
        };
        let t = text.trim();
        Ok(match self {
            ParameterValue::Integer(_) => ParameterValue::Integer(t.parse().map_err(|_| bad())?),
            ParameterValue::Unsigned(_) => ParameterValue::Unsigned(t.parse().map_err(|_| bad())?),
            ParameterValue::Real(_) => ParameterValue::Real(t.parse().map_err(|_| bad())?),
            ParameterValue::Complex(_) => ParameterValue::Complex(parse_complex(t)?),
            ParameterValue::ComplexPair(..) => {
                let (a, b) = parse_complex_pair(t)?;
                ParameterValue::ComplexPair(a, b)
            }
            ParameterValue::Text(_) => ParameterValue::Text(text.to_string()),
            ParameterValue::Token { choices, .. } => {
                let value = choices.iter().find(|c| **c == t).ok_or_else(bad)?;
                ParameterValue::Token {
                    value: value.to_string(),
                    choices,
                }
            }
            ParameterValue::Flag(_) => ParameterValue::Flag(match t {
                "true" | "1" => true,
                "false" | "0" => false,
                _ => return Err(bad()),
            }),
        })
    }
}

impl fmt::Display for ParameterValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParameterValue::Integer(v) => write!(f, "{v}"),
            ParameterValue::Unsigned(v) => write!(f, "{v}"),
            ParameterValue::Real(v) => write!(f, "{v:?}"),
            ParameterValue::Complex(c) => f.write_str(&format_complex(*c)),
            ParameterValue::ComplexPair(a, b) => {
                write!(f, "{},{}", format_complex(*a), format_complex(*b))
            }
            ParameterValue::Text(s) => f.write_str(s),
            ParameterValue::Token { value, .. } => f.write_str(value),
            ParameterValue::Flag(b) => write!(f, "{b}"),
        }
    }
}

/// `(re,im)` with shortest round-trip formatting of both parts.
pub fn format_complex(c: C64) -> String {
    format!("({:?},{:?})", c.re, c.im)
}

/// `"(a,b)"` → `a + bi`; a bare real `"x"` → `x + 0i`.
pub fn parse_complex(text: &str) -> Result<C64> {
    let t = text.trim();
    let malformed = || Error::MalformedComplex(text.to_string());
    if let Some(inner) = t.strip_prefix('(') {
        let inner = inner.strip_suffix(')').ok_or_else(malformed)?;
        let (re, im) = inner.split_once(',').ok_or_else(malformed)?;
        let re: f64 = re.trim().parse().map_err(|_| malformed())?;
        let im: f64 = im.trim().parse().map_err(|_| malformed())?;
        Ok(C64::new(re, im))
    } else {
        t.parse::<f64>().map(|re| C64::new(re, 0.0)).map_err(|_| malformed())
    }
}

/// Two complex numbers separated by a top-level comma: `(1,0),(0,0)`.
pub fn parse_complex_pair(text: &str) -> Result<(C64, C64)> {
    let mut depth = 0i32;
    let split = text.char_indices().find(|&(_, ch)| {
        match ch {
            '(' => depth += 1,
            ')' => depth -= 1,
            ',' if depth == 0 => return true,
            _ => {}
        }
        false
    });
    let (i, _) = split.ok_or_else(|| Error::MalformedComplex(text.to_string()))?;
    Ok((parse_complex(&text[..i])?, parse_complex(&text[i + 1..])?))
}

/// Types storable in a [`ParameterTable`].
pub trait ParamType: Sized {
    fn into_value(self) -> ParameterValue;
    fn from_value(value: &ParameterValue) -> Option<Self>;
}

/// Enumerations stored as one of a fixed set of tokens.
pub trait TokenParam: Copy {
    const CHOICES: &'static [&'static str];
    fn token(self) -> &'static str;
    fn from_token(token: &str) -> Option<Self>;
}

impl<T: TokenParam> ParamType for T {
    fn into_value(self) -> ParameterValue {
        ParameterValue::Token {
            value: self.token().to_string(),
            choices: T::CHOICES,
        }
    }

    fn from_value(value: &ParameterValue) -> Option<Self> {
        match value {
            ParameterValue::Token { value, .. } => T::from_token(value),
            _ => None,
        }
    }
}

macro_rules! param_type {
    ($ty:ty, $variant:ident) => {
        impl ParamType for $ty {
            fn into_value(self) -> ParameterValue {
                ParameterValue::$variant(self)
            }

            fn from_value(value: &ParameterValue) -> Option<Self> {
                match value {
                    ParameterValue::$variant(v) => Some(v.clone()),
                    _ => None,
                }
            }
        }
    };
}

param_type!(i64, Integer);
param_type!(u64, Unsigned);
param_type!(f64, Real);
param_type!(C64, Complex);
param_type!(String, Text);
param_type!(bool, Flag);

impl ParamType for usize {
    fn into_value(self) -> ParameterValue {
        ParameterValue::Unsigned(self as u64)
    }

    fn from_value(value: &ParameterValue) -> Option<Self> {
        match value {
            ParameterValue::Unsigned(v) => usize::try_from(*v).ok(),
            _ => None,
        }
    }
}

impl ParamType for (C64, C64) {
    fn into_value(self) -> ParameterValue {
        ParameterValue::ComplexPair(self.0, self.1)
    }

    fn from_value(value: &ParameterValue) -> Option<Self> {
        match value {
            ParameterValue::ComplexPair(a, b) => Some((*a, *b)),
            _ => None,
        }
    }
}

/// Typed reference to a registered parameter.
#[derive(Debug)]
pub struct Handle<T> {
    name: String,
    _type: PhantomData<fn() -> T>,
}

impl<T> Clone for Handle<T> {
    fn clone(&self) -> Self {
        Handle {
            name: self.name.clone(),
            _type: PhantomData,
        }
    }
}

impl<T> Handle<T> {
    /// Effective name, prefix included.
    pub fn name(&self) -> &str {
        &self.name
    }
}

#[derive(Clone, Debug)]
struct Entry {
    description: String,
    default: ParameterValue,
    value: ParameterValue,
    set: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum UpdateOutcome {
    Parsed,
    HelpRequested,
}

/// Ordered collection of named, typed parameters.
#[derive(Clone, Debug, Default)]
pub struct ParameterTable {
    entries: IndexMap<String, Entry>,
}

impl ParameterTable {
    pub fn new() -> Self {
        Self::default()
    }

    /// Registers `name` followed by `prefix` (if any).
    pub fn add<T: ParamType>(
        &mut self,
        name: &str,
        description: &str,
        default: T,
        prefix: Option<&str>,
    ) -> Result<Handle<T>> {
        let full = format!("{name}{}", prefix.unwrap_or(""));
        if self.entries.contains_key(&full) {
            return Err(Error::DuplicateParameter(full));
        }
        let value = default.into_value();
        self.entries.insert(
            full.clone(),
            Entry {
                description: description.to_string(),
                default: value.clone(),
                value,
                set: false,
            },
        );
        Ok(Handle {
            name: full,
            _type: PhantomData,
        })
    }

    pub fn handle<T: ParamType>(&self, name: &str) -> Result<Handle<T>> {
        let entry = self
            .entries
            .get(name)
            .ok_or_else(|| Error::UnknownParameter(name.to_string()))?;
        if T::from_value(&entry.value).is_none() {
            return Err(Error::BadValue {
                token: name.to_string(),
                expected: entry.value.type_name(),
            });
        }
        Ok(Handle {
            name: name.to_string(),
            _type: PhantomData,
        })
    }

    pub fn get<T: ParamType>(&self, handle: &Handle<T>) -> T {
        T::from_value(&self.entries[&handle.name].value)
            .expect("handle type checked at registration")
    }

    /// Value by effective name.
    pub fn value<T: ParamType>(&self, name: &str) -> Result<T> {
        let h = self.handle::<T>(name)?;
        Ok(self.get(&h))
    }

    /// Changes the value programmatically; the default shown in help changes
    /// too, but the parameter does not count as set on the command line.
    pub fn set_default<T: ParamType>(&mut self, handle: &Handle<T>, value: T) {
        let e = &mut self.entries[&handle.name];
        e.value = value.into_value();
        e.default = e.value.clone();
    }

    /// Whether the parameter was given explicitly on the command line.
    pub fn is_set(&self, name: &str) -> bool {
        self.entries.get(name).is_some_and(|e| e.set)
    }

    pub fn contains(&self, name: &str) -> bool {
        self.entries.contains_key(name)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }

    pub fn raw_value(&self, name: &str) -> Option<&ParameterValue> {
        self.entries.get(name).map(|e| &e.value)
    }

    pub fn default_value(&self, name: &str) -> Option<&ParameterValue> {
        self.entries.get(name).map(|e| &e.default)
    }

    /// Parses `--name value` pairs. `--help` anywhere wins over everything
    /// else, including errors in other tokens.
    pub fn update<S: AsRef<str>>(&mut self, args: &[S], marker: &str) -> Result<UpdateOutcome> {
        assert!(!marker.is_empty(), "prefix marker must not be empty");
        let help = format!("{marker}help");
        if args.iter().any(|a| a.as_ref() == help) {
            return Ok(UpdateOutcome::HelpRequested);
        }
        let mut i = 0;
        while i < args.len() {
            let token = args[i].as_ref();
            let name = token
                .strip_prefix(marker)
                .ok_or_else(|| Error::UnexpectedArgument(token.to_string()))?;
            let entry = self
                .entries
                .get_mut(name)
                .ok_or_else(|| Error::UnknownParameter(token.to_string()))?;
            let next = args.get(i + 1).map(|s| s.as_ref());
            if let ParameterValue::Flag(_) = entry.value {
                match next.map(|n| entry.value.parse_as(n)) {
                    Some(Ok(v)) => {
                        entry.value = v;
                        i += 2;
                    }
                    _ => {
                        entry.value = ParameterValue::Flag(true);
                        i += 1;
                    }
                }
                entry.set = true;
                continue;
            }
            let text = next.ok_or_else(|| Error::MissingValue(token.to_string()))?;
            let parsed = entry.value.parse_as(text);
            let value = match parsed {
                Err(_) if text.starts_with(marker) => {
                    return Err(Error::MissingValue(token.to_string()))
                }
                other => other?,
            };
            entry.value = value;
            entry.set = true;
            i += 2;
        }
        Ok(UpdateOutcome::Parsed)
    }

    /// One line per parameter after a header: flag, type, description and
    /// default, in registration order.
    pub fn help(&self, marker: &str) -> String {
        let rows: Vec<[String; 4]> = self
            .entries
            .iter()
            .map(|(name, e)| {
                [
                    format!("{marker}{name}"),
                    e.default.type_name(),
                    e.description.clone(),
                    e.default.to_string(),
                ]
            })
            .collect();
        let w0 = rows.iter().map(|r| r[0].len()).max().unwrap_or(0);
        let w1 = rows.iter().map(|r| r[1].len()).max().unwrap_or(0);
        let mut out = String::from("Available parameters (name, type, description, default):\n");
        for r in rows {
            out.push_str(&format!(
                "{:<w0$}  {:<w1$}  {}  [default: {}]\n",
                r[0], r[1], r[2], r[3]
            ));
        }
        out
    }

    /// `(name, printed value)` pairs in registration order.
    pub fn dump(&self) -> Vec<(String, String)> {
        self.entries
            .iter()
            .map(|(n, e)| (n.clone(), e.value.to_string()))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[derive(Clone, Copy, Debug, PartialEq)]
    enum Colour {
        Red,
        Blue,
    }

    impl TokenParam for Colour {
        const CHOICES: &'static [&'static str] = &["red", "blue"];
        fn token(self) -> &'static str {
            match self {
                Colour::Red => "red",
                Colour::Blue => "blue",
            }
        }
        fn from_token(token: &str) -> Option<Self> {
            match token {
                "red" => Some(Colour::Red),
                "blue" => Some(Colour::Blue),
                _ => None,
            }
        }
    }

    fn args(s: &[&str]) -> Vec<String> {
        s.iter().map(|x| x.to_string()).collect()
    }

    #[test]
    fn prefixed_registration() {
        let mut t = ParameterTable::new();
        let plain = t.add("cutoff", "Fock cutoff", 30usize, None).unwrap();
        let p = t.add("cutoff", "Fock cutoff", 10usize, Some("P")).unwrap();
        let m = t.add("cutoff", "Fock cutoff", 12usize, Some("M")).unwrap();
        assert_eq!(plain.name(), "cutoff");
        assert_eq!(p.name(), "cutoffP");
        assert_eq!(m.name(), "cutoffM");
        assert_eq!(t.get(&plain), 30);
        assert!(matches!(
            t.add("cutoff", "again", 1usize, Some("P")),
            Err(Error::DuplicateParameter(_))
        ));
    }

    #[test]
    fn parses_pairs_flags_and_tokens() {
        let mut t = ParameterTable::new();
        let eps = t.add("eps", "tolerance", 1e-6, None).unwrap();
        let eta = t.add("eta", "pump", C64::new(0.0, 0.0), None).unwrap();
        let colour = t.add("colour", "colour", Colour::Red, None).unwrap();
        let verbose = t.add("verbose", "chatty", false, None).unwrap();
        let delta = t.add("deltaC", "detuning", 0.0, None).unwrap();
        let outcome = t
            .update(
                &args(&["--eps", "1e-12", "--verbose", "--eta", "(2,-1)", "--colour", "blue", "--deltaC", "-10"]),
                "--",
            )
            .unwrap();
        assert_eq!(outcome, UpdateOutcome::Parsed);
        assert_eq!(t.get(&eps), 1e-12);
        assert_eq!(t.get(&eta), C64::new(2.0, -1.0));
        assert_eq!(t.get(&colour), Colour::Blue);
        assert!(t.get(&verbose));
        assert_eq!(t.get(&delta), -10.0);
        assert!(t.is_set("eps") && !t.is_set("nonexistent"));
    }

    #[test]
    fn explicit_flag_values() {
        let mut t = ParameterTable::new();
        let f = t.add("resume", "resume", true, None).unwrap();
        t.update(&args(&["--resume", "false"]), "--").unwrap();
        assert!(!t.get(&f));
        assert!(t.is_set("resume"));
    }

    #[test]
    fn reports_errors_with_token() {
        let mut t = ParameterTable::new();
        t.add("eps", "tolerance", 1e-6, None).unwrap();
        t.add("eta", "pump", C64::new(0.0, 0.0), None).unwrap();
        match t.update(&args(&["--frobnicate", "3"]), "--") {
            Err(Error::UnknownParameter(tok)) => assert_eq!(tok, "--frobnicate"),
            other => panic!("{other:?}"),
        }
        assert!(matches!(t.update(&args(&["--eps"]), "--"), Err(Error::MissingValue(_))));
        assert!(matches!(
            t.update(&args(&["--eps", "--eta", "1"]), "--"),
            Err(Error::MissingValue(_))
        ));
        assert!(matches!(
            t.update(&args(&["--eps", "small"]), "--"),
            Err(Error::BadValue { .. })
        ));
        assert!(matches!(
            t.update(&args(&["--eta", "(1,2"]), "--"),
            Err(Error::MalformedComplex(_))
        ));
        assert!(matches!(
            t.update(&args(&["stray"]), "--"),
            Err(Error::UnexpectedArgument(_))
        ));
    }

    #[test]
    fn help_short_circuits() {
        let mut t = ParameterTable::new();
        t.add("eps", "ODE tolerance", 1e-6, None).unwrap();
        assert_eq!(
            t.update(&args(&["--bogus", "--help"]), "--").unwrap(),
            UpdateOutcome::HelpRequested
        );
        let h = t.help("--");
        let lines: Vec<&str> = h.lines().collect();
        assert_eq!(lines.len(), 2);
        assert!(lines[1].starts_with("--eps"));
        assert!(lines[1].contains("real") && lines[1].contains("ODE tolerance"));
        assert!(lines[1].contains("1e-6"));
    }

    #[test]
    fn complex_notation() {
        assert_eq!(parse_complex("(2,-1)").unwrap(), C64::new(2.0, -1.0));
        assert_eq!(parse_complex("0").unwrap(), C64::new(0.0, 0.0));
        assert_eq!(parse_complex("(1.5,2.5)").unwrap(), C64::new(1.5, 2.5));
        assert_eq!(parse_complex(" ( 1 , 2 ) ").unwrap(), C64::new(1.0, 2.0));
        for bad in ["", "(1)", "(a,b)", "1,2", "(1,2", "abc"] {
            assert!(parse_complex(bad).is_err(), "{bad}");
        }
        assert_eq!(
            parse_complex_pair("(1,0),(0,-2)").unwrap(),
            (C64::new(1.0, 0.0), C64::new(0.0, -2.0))
        );
        assert_eq!(
            parse_complex_pair("0.6,0.8").unwrap(),
            (C64::new(0.6, 0.0), C64::new(0.8, 0.0))
        );
    }

    #[test]
    fn update_is_idempotent() {
        let mut t = ParameterTable::new();
        t.add("eps", "tolerance", 1e-6, None).unwrap();
        t.add("dc", "steps", 0u64, None).unwrap();
        let a = args(&["--eps", "3e-9", "--dc", "7"]);
        t.update(&a, "--").unwrap();
        let first = t.dump();
        t.update(&a, "--").unwrap();
        assert_eq!(first, t.dump());
    }

    mod props {
        use super::super::*;
        use proptest::prelude::*;

        fn roundtrip(v: ParameterValue) {
            let printed = v.to_string();
            assert_eq!(v.parse_as(&printed).unwrap(), v, "{printed}");
        }

        proptest! {
            #[test]
            fn integers(x: i64) { roundtrip(ParameterValue::Integer(x)); }

            #[test]
            fn unsigned(x: u64) { roundtrip(ParameterValue::Unsigned(x)); }

            #[test]
            fn reals(x in proptest::num::f64::NORMAL | proptest::num::f64::ZERO | proptest::num::f64::SUBNORMAL) {
                roundtrip(ParameterValue::Real(x));
            }

            #[test]
            fn complexes(a in -1e300f64..1e300, b in -1e-300f64..1e-300) {
                roundtrip(ParameterValue::Complex(C64::new(a, b)));
                roundtrip(ParameterValue::ComplexPair(C64::new(b, a), C64::new(a, a)));
            }

            #[test]
            fn texts(s in "[a-zA-Z0-9_.,:-]{0,12}") {
                roundtrip(ParameterValue::Text(s));
            }

            #[test]
            fn flags(b: bool) { roundtrip(ParameterValue::Flag(b)); }
        }
    }
}

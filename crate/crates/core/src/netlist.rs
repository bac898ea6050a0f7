//! The `.net` gate-level netlist format.
//!
//! ```text
//! # comment
//! circuit <name>
//! input <id> mask
//! input <id> share <secret> <index>
//! gate <id> = <op> <operand> [<operand>]
//! output <id>
//! ```
//!
//! `<op>` is one of `not`, `and`, `or`, `xor`. An operand is a wire name,
//! optionally prefixed with `!` to fuse an inversion into the consuming gate;
//! `const0` and `const1` are reserved wires. Gates may only read wires
//! declared above them, which makes every valid netlist acyclic.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use thiserror::Error;

use crate::formula::{Assignment, FormulaError, VarId, RESERVED_NAMES};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum NetlistError {
    #[error("netlist is not valid UTF-8")]
    InvalidUtf8,
    #[error("line {line}: syntax error: {message}")]
    Syntax { line: usize, message: String },
    #[error("line {line}: {op} takes exactly {expected} operand(s), found {found}")]
    Arity {
        line: usize,
        op: GateOp,
        expected: usize,
        found: usize,
    },
    #[error("line {line}: duplicate id `{name}` (first declared on line {first})")]
    DuplicateId {
        line: usize,
        name: String,
        first: usize,
    },
    #[error("line {line}: undefined wire `{name}`")]
    UndefinedWire { line: usize, name: String },
    #[error("line {line}: forward reference to `{name}`, declared later on line {declared}")]
    ForwardReference {
        line: usize,
        name: String,
        declared: usize,
    },
    #[error("secret `{secret}` has a single share; at least two are required")]
    SingleShare { secret: String },
    #[error("secret `{secret}`: share indices must be contiguous from 0, found {indices:?}")]
    ShareIndices { secret: String, indices: Vec<usize> },
    #[error("netlist declares no outputs")]
    NoOutputs,
    #[error("unknown builtin circuit `{0}`")]
    UnknownBuiltin(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum InputRole {
    Mask,
    Share { secret: String, index: usize },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Input {
    pub id: VarId,
    pub role: InputRole,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GateOp {
    Not,
    And,
    Or,
    Xor,
}

impl GateOp {
    pub fn arity(self) -> usize {
        match self {
            GateOp::Not => 1,
            _ => 2,
        }
    }

    fn parse(s: &str) -> Option<Self> {
        match s.to_ascii_lowercase().as_str() {
            "not" => Some(GateOp::Not),
            "and" => Some(GateOp::And),
            "or" => Some(GateOp::Or),
            "xor" => Some(GateOp::Xor),
            _ => None,
        }
    }
}

impl fmt::Display for GateOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            GateOp::Not => "not",
            GateOp::And => "and",
            GateOp::Or => "or",
            GateOp::Xor => "xor",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Wire {
    Const(bool),
    Named(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Operand {
    pub wire: Wire,
    pub negated: bool,
}

impl fmt::Display for Operand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.negated {
            f.write_str("!")?;
        }
        match &self.wire {
            Wire::Const(b) => write!(f, "const{}", *b as u8),
            Wire::Named(n) => f.write_str(n),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Gate {
    pub id: String,
    pub op: GateOp,
    pub operands: Vec<Operand>,
}

/// The unmasked value `s = s_0 ^ ... ^ s_d` of a secret, by its shares.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SecretSpec {
    pub name: String,
    /// Ordered by share index.
    pub shares: Vec<VarId>,
}

/// A validated combinational netlist.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CircuitNetlist {
    name: String,
    inputs: Vec<Input>,
    gates: Vec<Gate>,
    outputs: Vec<String>,
}

pub fn parse_netlist(bytes: &[u8]) -> Result<CircuitNetlist, NetlistError> {
    let text = std::str::from_utf8(bytes).map_err(|_| NetlistError::InvalidUtf8)?;
    CircuitNetlist::parse(text)
}

fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_alphabetic() || c == '_')
        && chars.all(|c| c.is_alphanumeric() || matches!(c, '_' | '.' | '[' | ']' | '$'))
}

enum Decl<'a> {
    Input(&'a str, InputRole),
    Gate(&'a str, GateOp, Vec<&'a str>),
    Output(&'a str),
}

impl CircuitNetlist {
    pub fn parse(text: &str) -> Result<Self, NetlistError> {
        let mut name: Option<String> = None;
        let mut decls: Vec<(usize, Decl<'_>)> = Vec::new();
        for (k, raw) in text.lines().enumerate() {
            let line = k + 1;
            let content = raw.split('#').next().unwrap_or("");
            let tokens: Vec<&str> = content.split_whitespace().collect();
            let syntax = |message: String| NetlistError::Syntax { line, message };
            let Some(&head) = tokens.first() else {
                continue;
            };
            let check_id = |id: &str| {
                if RESERVED_NAMES.contains(&id) || !is_identifier(id) {
                    Err(syntax(format!("invalid identifier `{id}`")))
                } else {
                    Ok(())
                }
            };
            match head {
                "circuit" => {
                    if tokens.len() != 2 {
                        return Err(syntax("expected `circuit <name>`".into()));
                    }
                    if name.is_some() {
                        return Err(syntax("circuit name declared twice".into()));
                    }
                    name = Some(tokens[1].to_string());
                }
                "input" => {
                    let role =
                        match tokens.get(2..) {
                            Some(["mask"]) => InputRole::Mask,
                            Some(["share", secret, index]) => {
                                check_id(secret)?;
                                let index = index.parse().map_err(|_| {
                                    syntax(format!("invalid share index `{index}`"))
                                })?;
                                InputRole::Share {
                                    secret: secret.to_string(),
                                    index,
                                }
                            }
                            _ => return Err(syntax(
                                "expected `input <id> mask` or `input <id> share <secret> <index>`"
                                    .into(),
                            )),
                        };
                    check_id(tokens[1])?;
                    decls.push((line, Decl::Input(tokens[1], role)));
                }
                "gate" => {
                    if tokens.len() < 4 || tokens[2] != "=" {
                        return Err(syntax("expected `gate <id> = <op> <operands>`".into()));
                    }
                    check_id(tokens[1])?;
                    let op = GateOp::parse(tokens[3])
                        .ok_or_else(|| syntax(format!("unknown gate operation `{}`", tokens[3])))?;
                    let operands = tokens[4..].to_vec();
                    if operands.len() != op.arity() {
                        return Err(NetlistError::Arity {
                            line,
                            op,
                            expected: op.arity(),
                            found: operands.len(),
                        });
                    }
                    decls.push((line, Decl::Gate(tokens[1], op, operands)));
                }
                "output" => {
                    if tokens.len() != 2 {
                        return Err(syntax("expected `output <id>`".into()));
                    }
                    decls.push((line, Decl::Output(tokens[1])));
                }
                other => return Err(syntax(format!("unknown directive `{other}`"))),
            }
        }

        let mut declared_at: HashMap<&str, usize> = HashMap::new();
        for (line, decl) in &decls {
            let id = match decl {
                Decl::Input(id, _) | Decl::Gate(id, ..) => *id,
                Decl::Output(_) => continue,
            };
            if let Some(&first) = declared_at.get(id) {
                return Err(NetlistError::DuplicateId {
                    line: *line,
                    name: id.to_string(),
                    first,
                });
            }
            declared_at.insert(id, *line);
        }

        let resolve = |line: usize, token: &str| -> Result<Operand, NetlistError> {
            let (negated, wire_name) = match token.strip_prefix('!') {
                Some(rest) => (true, rest),
                None => (false, token),
            };
            let wire = match wire_name {
                "const0" => Wire::Const(false),
                "const1" => Wire::Const(true),
                n => match declared_at.get(n) {
                    None => {
                        return Err(NetlistError::UndefinedWire {
                            line,
                            name: n.to_string(),
                        })
                    }
                    Some(&declared) if declared >= line => {
                        return Err(NetlistError::ForwardReference {
                            line,
                            name: n.to_string(),
                            declared,
                        })
                    }
                    Some(_) => Wire::Named(n.to_string()),
                },
            };
            Ok(Operand { wire, negated })
        };

        let mut inputs = Vec::new();
        let mut gates = Vec::new();
        let mut outputs = Vec::new();
        for (line, decl) in decls {
            match decl {
                Decl::Input(id, role) => inputs.push(Input {
                    id: VarId::new(id).expect("identifier checked"),
                    role,
                }),
                Decl::Gate(id, op, tokens) => {
                    let operands = tokens
                        .iter()
                        .map(|t| resolve(line, t))
                        .collect::<Result<_, _>>()?;
                    gates.push(Gate {
                        id: id.to_string(),
                        op,
                        operands,
                    });
                }
                Decl::Output(id) => {
                    if !declared_at.contains_key(id) {
                        return Err(NetlistError::UndefinedWire {
                            line,
                            name: id.to_string(),
                        });
                    }
                    outputs.push(id.to_string());
                }
            }
        }
        if outputs.is_empty() {
            return Err(NetlistError::NoOutputs);
        }

        let netlist = CircuitNetlist {
            name: name.unwrap_or_else(|| "unnamed".to_string()),
            inputs,
            gates,
            outputs,
        };
        netlist.validate_secrets()?;
        Ok(netlist)
    }

    fn validate_secrets(&self) -> Result<(), NetlistError> {
        for (secret, mut indices) in self.share_indices() {
            indices.sort_unstable();
            if indices.len() < 2 {
                return Err(NetlistError::SingleShare {
                    secret: secret.to_string(),
                });
            }
            if indices.iter().enumerate().any(|(k, &i)| k != i) {
                return Err(NetlistError::ShareIndices {
                    secret: secret.to_string(),
                    indices,
                });
            }
        }
        Ok(())
    }

    fn share_indices(&self) -> BTreeMap<&str, Vec<usize>> {
        let mut by_secret: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
        for input in &self.inputs {
            if let InputRole::Share { secret, index } = &input.role {
                by_secret.entry(secret).or_default().push(*index);
            }
        }
        by_secret
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn inputs(&self) -> &[Input] {
        &self.inputs
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn outputs(&self) -> &[String] {
        &self.outputs
    }

    pub fn input_vars(&self) -> Vec<VarId> {
        self.inputs.iter().map(|i| i.id.clone()).collect()
    }

    pub fn masks(&self) -> Vec<VarId> {
        self.inputs
            .iter()
            .filter(|i| i.role == InputRole::Mask)
            .map(|i| i.id.clone())
            .collect()
    }

    /// One entry per secret name (sorted by name), shares in index order.
    pub fn secrets(&self) -> Vec<SecretSpec> {
        let mut by_secret: BTreeMap<&str, Vec<(usize, VarId)>> = BTreeMap::new();
        for input in &self.inputs {
            if let InputRole::Share { secret, index } = &input.role {
                by_secret
                    .entry(secret)
                    .or_default()
                    .push((*index, input.id.clone()));
            }
        }
        by_secret
            .into_iter()
            .map(|(name, mut shares)| {
                shares.sort_by_key(|(i, _)| *i);
                SecretSpec {
                    name: name.to_string(),
                    shares: shares.into_iter().map(|(_, v)| v).collect(),
                }
            })
            .collect()
    }

    pub fn count_gates(&self, op: GateOp) -> usize {
        self.gates.iter().filter(|g| g.op == op).count()
    }

    /// Concrete evaluation of every output, in declaration order.
    pub fn simulate(&self, assignment: &Assignment) -> Result<Vec<bool>, FormulaError> {
        let mut values: HashMap<&str, bool> = HashMap::new();
        for input in &self.inputs {
            let v = assignment
                .get(&input.id)
                .ok_or_else(|| FormulaError::IncompleteAssignment(input.id.clone()))?;
            values.insert(input.id.as_str(), v);
        }
        for gate in &self.gates {
            let read = |o: &Operand| {
                let v = match &o.wire {
                    Wire::Const(b) => *b,
                    Wire::Named(n) => values[n.as_str()],
                };
                v ^ o.negated
            };
            let args: Vec<bool> = gate.operands.iter().map(read).collect();
            let v = match gate.op {
                GateOp::Not => !args[0],
                GateOp::And => args[0] && args[1],
                GateOp::Or => args[0] || args[1],
                GateOp::Xor => args[0] ^ args[1],
            };
            values.insert(gate.id.as_str(), v);
        }
        Ok(self.outputs.iter().map(|o| values[o.as_str()]).collect())
    }

    /// Canonical `.net` text; parses back to an identical netlist.
    pub fn to_text(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for CircuitNetlist {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "circuit {}", self.name)?;
        for input in &self.inputs {
            match &input.role {
                InputRole::Mask => writeln!(f, "input {} mask", input.id)?,
                InputRole::Share { secret, index } => {
                    writeln!(f, "input {} share {} {}", input.id, secret, index)?
                }
            }
        }
        for gate in &self.gates {
            write!(f, "gate {} = {}", gate.id, gate.op)?;
            for o in &gate.operands {
                write!(f, " {o}")?;
            }
            writeln!(f)?;
        }
        for o in &self.outputs {
            writeln!(f, "output {o}")?;
        }
        Ok(())
    }
}

impl std::str::FromStr for CircuitNetlist {
    type Err = NetlistError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        CircuitNetlist::parse(s)
    }
}

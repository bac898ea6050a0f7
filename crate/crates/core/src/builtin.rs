//! Netlists shipped with the crate. The same files live under `netlists/`.

use crate::netlist::{CircuitNetlist, NetlistError};

const SOURCES: [(&str, &str); 5] = [
    ("chi3", include_str!("../netlists/chi3.net")),
    (
        "chi3_reuse_b0",
        include_str!("../netlists/chi3_reuse_b0.net"),
    ),
    (
        "chi3_reuse_c0",
        include_str!("../netlists/chi3_reuse_c0.net"),
    ),
    (
        "chi3_reuse_a0",
        include_str!("../netlists/chi3_reuse_a0.net"),
    ),
    ("fig2_toy", include_str!("../netlists/fig2_toy.net")),
];

pub fn builtin_names() -> impl Iterator<Item = &'static str> {
    SOURCES.iter().map(|(n, _)| *n)
}

pub fn builtin_source(name: &str) -> Option<&'static str> {
    SOURCES.iter().find(|(n, _)| *n == name).map(|(_, s)| *s)
}

pub fn builtin_circuit(name: &str) -> Result<CircuitNetlist, NetlistError> {
    let text =
        builtin_source(name).ok_or_else(|| NetlistError::UnknownBuiltin(name.to_string()))?;
    CircuitNetlist::parse(text)
}

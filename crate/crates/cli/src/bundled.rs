//! Problem files shipped with the binary.

pub struct Example {
    pub name: &'static str,
    /// Subcommand the file is meant for.
    pub command: &'static str,
    pub text: &'static str,
}

pub const EXAMPLES: [Example; 5] = [
    Example {
        name: "heisenberg-line",
        command: "closure-polymap",
        text: include_str!("../problems/heisenberg-line.json"),
    },
    Example {
        name: "heisenberg-abelian",
        command: "closure-orbit",
        text: include_str!("../problems/heisenberg-abelian.json"),
    },
    Example { name: "kronecker", command: "equi", text: include_str!("../problems/kronecker.json") },
    Example { name: "ln-curve", command: "equi", text: include_str!("../problems/ln-curve.json") },
    Example { name: "hrushovski", command: "equi", text: include_str!("../problems/hrushovski.json") },
];

pub fn find(name: &str) -> Option<&'static Example> {
    EXAMPLES.iter().find(|e| e.name == name)
}

//! Command-line surface.

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(name = "planar-affine", version, about = "Formal normal forms and affine partners of planar vector fields")]
pub struct Cli {
    #[command(flatten)]
    pub opts: Common,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct Common {
    /// Truncation order
    #[arg(long, global = true, default_value_t = 12)]
    pub order: u32,
    /// Arithmetic; exact when all literals are rational unless set
    #[arg(long, global = true, value_enum)]
    pub mode: Option<ModeArg>,
    /// Zero tolerance for float coefficients
    #[arg(long, global = true, default_value_t = 1e-9)]
    pub tol: f64,
    /// Smallest divisor accepted by the small-divisor solver
    #[arg(long, global = true, default_value_t = 1e-8)]
    pub divisor_floor: f64,
    /// Print the report as JSON
    #[arg(long, global = true)]
    pub json: bool,
    /// Whether a float eigenvalue ratio is to be treated as rational
    #[arg(long, global = true, value_enum)]
    pub lambda_class: Option<LambdaClass>,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum ModeArg {
    Exact,
    Float,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum LambdaClass {
    Rational,
    Irrational,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Tri {
    Yes,
    No,
    Unknown,
}

impl Tri {
    pub fn flag(self) -> Option<bool> {
        match self {
            Tri::Yes => Some(true),
            Tri::No => Some(false),
            Tri::Unknown => None,
        }
    }
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Parse a field and print it back
    Parse { field: String },
    /// Classify the singular point at the origin
    Classify { field: String },
    /// Split off the separatrices and write Z = U·X
    Prepare { field: String },
    /// Normal form along the route of the field's class
    Normalize {
        field: String,
        /// Transverse partner Y with [Z, Y] = δY
        #[arg(long)]
        partner: Option<String>,
    },
    /// Formal invariants (k, μ, Q) of a resonant field
    Invariants { field: String },
    /// Transverse partners of the normal form over an exponent window
    Partner {
        field: String,
        /// n0:n1,m0:m1
        #[arg(long, default_value = "-2:2,-2:2", allow_hyphen_values = true)]
        window: String,
        /// A single ratio instead of a window
        #[arg(long, allow_hyphen_values = true)]
        delta: Option<String>,
    },
    /// Delta-lattice of the germ
    Lattice {
        field: String,
        #[arg(long, value_enum, default_value_t = Tri::Unknown)]
        linearizable: Tri,
        #[arg(long, value_enum, default_value_t = Tri::Unknown)]
        normalform: Tri,
        /// Also test membership of this ratio
        #[arg(long, allow_hyphen_values = true)]
        delta: Option<String>,
    },
    /// Invariance equations for X = T·Z + N·Y at a base point
    GaloisCheck {
        field: String,
        #[arg(long)]
        partner: String,
        /// x,y
        #[arg(long, allow_hyphen_values = true)]
        base_point: Option<String>,
        #[arg(long, default_value = "1", allow_hyphen_values = true)]
        t: String,
        #[arg(long, default_value = "0", allow_hyphen_values = true)]
        n: String,
    },
    /// Write a symmetry Γ of Z as Φ_Y^N ∘ Φ_Z^T
    DecomposeSymmetry {
        field: String,
        #[arg(long)]
        partner: String,
        /// Components of Γ around the base point, separated by ';'
        #[arg(long, allow_hyphen_values = true)]
        map: String,
        #[arg(long, allow_hyphen_values = true)]
        base_point: Option<String>,
    },
    /// Run a property suite
    Verify {
        suite: String,
        #[arg(long)]
        trials: Option<usize>,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
}

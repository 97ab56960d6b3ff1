//! Zigzag persistence with explicit representatives, maintained as wires.

mod sorted;

pub mod bar;
pub mod complex;
pub mod engine;
pub mod filtration;
pub mod formats;
pub mod matrices;
pub mod order;
pub mod random;
pub mod rips;
pub mod validator;
pub mod wires;

pub use bar::{Bar, Module};
pub use complex::{Chain, ComplexState, LiveId, Simplex, Vertex};
pub use engine::{run, Engine, Interval, PersistenceResult};
pub use filtration::{Direction, FiltrationStep, Op, ZigzagFiltration};
pub use order::{precedes, BirthKey};
pub use wires::{Bundle, Representative, Segment, Wire, WireKind, WireStore};

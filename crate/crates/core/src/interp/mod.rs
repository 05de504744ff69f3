//! Executable semantics: heap operations, the big-step evaluator with fuel,
//! the havoc macro, and predicate interpretations.

pub mod compile;
pub mod eval;
pub mod havoc;
pub mod heap;
pub mod interpretation;
pub mod value;

pub use eval::{Execution, Fuel, Inputs, Machine, Outcome, UndefReason};
pub use havoc::{determinize, determinize_with, havoc_int};
pub use heap::{heap_allocate, heap_read, heap_write, AuditHeap, Heap, HeapModel, TraceHeap};
pub use interpretation::{FormulaInterp, Interpretation, TupleInterp};
pub use value::{default_value, ObjVal, Value};

//! Heap models: the object sequence of the theory of heaps, and the
//! chronological write trace used as an independent cross-check.

use super::value::Value;

/// Operations the evaluator needs from a heap representation.
pub trait HeapModel: Clone + Eq + Ord + std::hash::Hash + Send + Sync {
    fn empty() -> Self;
    /// Appends `o` and returns its address, one past the previous length.
    fn allocate(&mut self, o: Value) -> u64;
    /// The object at `a`, or `def` if `a` is not an allocated address.
    fn read(&mut self, a: u64, def: &Value) -> Value;
    /// Replaces the object at `a`; no effect unless `a` is allocated.
    fn write(&mut self, a: u64, o: Value);
    /// Number of allocations performed.
    fn alloc_count(&self) -> u64;
}

/// A heap as a finite sequence of objects; address `a` names element `a - 1`.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Heap {
    pub objects: Vec<Value>,
}

impl Heap {
    pub fn len(&self) -> usize {
        self.objects.len()
    }

    pub fn is_empty(&self) -> bool {
        self.objects.is_empty()
    }

    pub fn valid(&self, a: u64) -> bool {
        a > 0 && a <= self.objects.len() as u64
    }

    pub fn get(&self, a: u64, def: &Value) -> Value {
        if self.valid(a) {
            self.objects[(a - 1) as usize].clone()
        } else {
            def.clone()
        }
    }
}

impl HeapModel for Heap {
    fn empty() -> Heap {
        Heap::default()
    }

    fn allocate(&mut self, o: Value) -> u64 {
        self.objects.push(o);
        self.objects.len() as u64
    }

    fn read(&mut self, a: u64, def: &Value) -> Value {
        self.get(a, def)
    }

    fn write(&mut self, a: u64, o: Value) {
        if self.valid(a) {
            self.objects[(a - 1) as usize] = o;
        }
    }

    fn alloc_count(&self) -> u64 {
        self.objects.len() as u64
    }
}

/// `allocate(h, o) = (h ++ [o], |h| + 1)`
pub fn heap_allocate(h: &Heap, o: Value) -> (Heap, u64) {
    let mut h = h.clone();
    let a = h.allocate(o);
    (h, a)
}

/// `read(h, a) = h[a - 1]` for `0 < a <= |h|`, `defObj` otherwise.
pub fn heap_read(h: &Heap, a: u64, def_obj: &Value) -> Value {
    h.get(a, def_obj)
}

/// `write(h, a, o) = h[a - 1 := o]` for `0 < a <= |h|`, `h` otherwise.
pub fn heap_write(h: &Heap, a: u64, o: Value) -> Heap {
    let mut h = h.clone();
    h.write(a, o);
    h
}

/// The heap as a chronological trace of `(address, object)` writes. A read
/// returns the most recent entry for its address.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TraceHeap {
    pub trace: Vec<(u64, Value)>,
    pub allocs: u64,
}

impl HeapModel for TraceHeap {
    fn empty() -> TraceHeap {
        TraceHeap::default()
    }

    fn allocate(&mut self, o: Value) -> u64 {
        self.allocs += 1;
        self.trace.push((self.allocs, o));
        self.allocs
    }

    fn read(&mut self, a: u64, def: &Value) -> Value {
        if a == 0 || a > self.allocs {
            return def.clone();
        }
        self.trace
            .iter()
            .rev()
            .find(|(p, _)| *p == a)
            .map(|(_, o)| o.clone())
            .unwrap_or_else(|| def.clone())
    }

    fn write(&mut self, a: u64, o: Value) {
        self.trace.push((a, o));
    }

    fn alloc_count(&self) -> u64 {
        self.allocs
    }
}

/// A [`Heap`] that records memory-safety violations: accesses to
/// unallocated addresses, and reads of objects never stored by `write`.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct AuditHeap {
    pub heap: Heap,
    pub written: Vec<bool>,
    /// First address accessed without being allocated.
    pub invalid: Option<u64>,
    /// First allocated address read before any write to it.
    pub unwritten: Option<u64>,
}

impl HeapModel for AuditHeap {
    fn empty() -> AuditHeap {
        AuditHeap::default()
    }

    fn allocate(&mut self, o: Value) -> u64 {
        self.written.push(false);
        self.heap.allocate(o)
    }

    fn read(&mut self, a: u64, def: &Value) -> Value {
        if !self.heap.valid(a) {
            self.invalid.get_or_insert(a);
        } else if !self.written[(a - 1) as usize] {
            self.unwritten.get_or_insert(a);
        }
        self.heap.get(a, def)
    }

    fn write(&mut self, a: u64, o: Value) {
        if self.heap.valid(a) {
            self.written[(a - 1) as usize] = true;
        } else {
            self.invalid.get_or_insert(a);
        }
        self.heap.write(a, o);
    }

    fn alloc_count(&self) -> u64 {
        self.heap.alloc_count()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn obj(c: &str, b: i64) -> Value {
        Value::obj(c, vec![Value::int(b)])
    }

    fn def() -> Value {
        obj("A", 0)
    }

    /// Every heap of length <= 4 over a two-constructor ADT with one 1-bit field.
    fn all_heaps() -> Vec<Heap> {
        let objs: Vec<Value> = ["A", "B"].iter().flat_map(|c| [0, 1].map(|b| obj(c, b))).collect();
        let mut out = vec![Heap::default()];
        let mut layer = vec![Heap::default()];
        for _ in 0..4 {
            let mut next = Vec::new();
            for h in &layer {
                for o in &objs {
                    next.push(heap_allocate(h, o.clone()).0);
                }
            }
            out.extend(next.iter().cloned());
            layer = next;
        }
        out
    }

    #[test]
    fn allocate_appends_and_returns_next_address() {
        let o1 = obj("A", 1);
        let o2 = obj("B", 0);
        let (h1, a1) = heap_allocate(&Heap::default(), o1.clone());
        assert_eq!((h1.objects.clone(), a1), (vec![o1.clone()], 1));
        let (h2, a2) = heap_allocate(&h1, o2.clone());
        assert_eq!((h2.objects, a2), (vec![o1, o2], 2));
    }

    #[test]
    fn reads_outside_the_heap_return_default() {
        assert_eq!(heap_read(&Heap::default(), 5, &def()), def());
        let (h, a) = heap_allocate(&Heap::default(), obj("B", 1));
        assert_eq!(heap_read(&h, a, &def()), obj("B", 1));
        assert_eq!(heap_read(&h, 0, &def()), def());
    }

    #[test]
    fn invalid_write_is_a_no_op() {
        assert_eq!(heap_write(&Heap::default(), 1, obj("B", 1)), Heap::default());
    }

    #[test]
    fn exhaustive_heap_laws() {
        let objs: Vec<Value> = ["A", "B"].iter().flat_map(|c| [0, 1].map(|b| obj(c, b))).collect();
        for h in all_heaps() {
            let n = h.len() as u64;
            for a in 0..=5u64 {
                for o in &objs {
                    let w = heap_write(&h, a, o.clone());
                    if a >= 1 && a <= n {
                        assert_eq!(heap_read(&w, a, &def()), *o);
                    } else {
                        assert_eq!(w, h);
                    }
                    for b in 0..=5u64 {
                        if b != a {
                            assert_eq!(heap_read(&w, b, &def()), heap_read(&h, b, &def()));
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn trace_returns_most_recent_write() {
        let mut t = TraceHeap::empty();
        assert_eq!(t.read(1, &def()), def());
        t.allocate(def());
        t.write(1, obj("B", 0));
        t.write(1, obj("B", 1));
        assert_eq!(t.read(1, &def()), obj("B", 1));
        t.write(3, obj("B", 1));
        assert_eq!(t.read(3, &def()), def());
    }

    #[test]
    fn audit_records_first_violations() {
        let mut h = AuditHeap::empty();
        let a = h.allocate(def());
        h.write(a, obj("B", 1));
        assert_eq!(h.read(a, &def()), obj("B", 1));
        assert_eq!((h.invalid, h.unwritten), (None, None));
        let b = h.allocate(def());
        h.read(b, &def());
        h.read(0, &def());
        h.write(7, def());
        assert_eq!((h.invalid, h.unwritten), (Some(0), Some(2)));
    }
}

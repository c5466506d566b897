//! Per-worker state storage and the global partition function.
//!
//! [`StateTable`] is an open-addressing table whose hashing, equality and
//! iteration depend only on the identity bytes of a state; the mutable
//! per-state metadata ([`StateMeta`]) lives next to the identity but can
//! never influence lookups. Entry ids are stable across resizes.
//!
//! [`owner`] maps identity bytes to a worker index with FNV-1a 64 so every
//! worker computes the same partition, and [`map_order`] is the total order
//! on map values (BOTTOM below everything, then byte-lexicographic).

use std::cmp::Ordering;

use crate::model::EncodedState;

pub const FNV_OFFSET_BASIS: u64 = 0xcbf2_9ce4_8422_2325;
pub const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

/// FNV-1a 64-bit hash.
pub fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut hash = FNV_OFFSET_BASIS;
    for &b in bytes {
        hash ^= b as u64;
        hash = hash.wrapping_mul(FNV_PRIME);
    }
    hash
}

/// Worker index owning the state with the given identity bytes.
///
/// Pure function of the bytes and the worker count; identical on every
/// worker, so states can be routed without coordination.
pub fn owner(bytes: &[u8], workers: usize) -> usize {
    assert!(workers >= 1, "worker count must be at least 1");
    if workers == 1 {
        return 0;
    }
    (fnv1a64(bytes) % workers as u64) as usize
}

/// Total order on map values: BOTTOM (`None`) is below every state, states
/// compare lexicographically on their bytes.
///
/// Panics if the two states have different widths; comparing states of
/// different models is a programming error.
pub fn map_order(a: Option<&EncodedState>, b: Option<&EncodedState>) -> Ordering {
    match (a, b) {
        (None, None) => Ordering::Equal,
        (None, Some(_)) => Ordering::Less,
        (Some(_), None) => Ordering::Greater,
        (Some(x), Some(y)) => {
            assert_eq!(
                x.len(),
                y.len(),
                "map_order on states of different widths"
            );
            x.as_bytes().cmp(y.as_bytes())
        }
    }
}

/// Mutable per-state bookkeeping for the MAP iterations.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StateMeta {
    /// Greatest accepting predecessor seen so far this iteration; `None`
    /// is BOTTOM. Stored as full state bytes because map values routinely
    /// name states owned by other workers.
    pub map_value: Option<EncodedState>,
    /// Iteration that last touched this entry; an entry is unvisited in
    /// the current iteration when the tag differs. Avoids clearing the
    /// table (which would lose the exclude flag) between iterations.
    pub iteration_tag: u32,
    /// Accepting state demoted to non-accepting for later iterations.
    pub excluded: bool,
    /// Accepting state that received a strictly greater map value this
    /// iteration.
    pub dominated: bool,
}

impl StateMeta {
    fn fresh() -> Self {
        StateMeta {
            map_value: None,
            iteration_tag: 0,
            excluded: false,
            dominated: false,
        }
    }
}

/// Stable handle to an interned state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct EntryId(u32);

impl EntryId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Debug, thiserror::Error)]
pub enum StoreError {
    #[error("state table limit of {limit} entries exhausted")]
    CapacityExceeded { limit: u64 },
}

const EMPTY_SLOT: u32 = u32::MAX;
const INITIAL_SLOTS: usize = 1 << 10;

/// Open-addressing state table with linear probing.
///
/// Identity bytes live in one contiguous arena (all entries share the
/// model's fixed width); the probe array stores entry indices and is
/// rebuilt on resize, so `EntryId`s stay valid for the table's lifetime.
pub struct StateTable {
    width: usize,
    limit: u64,
    identity: Vec<u8>,
    meta: Vec<StateMeta>,
    slots: Vec<u32>,
}

impl StateTable {
    pub fn new(width: usize) -> Self {
        Self::with_limit(width, u64::MAX)
    }

    /// Table refusing to grow past `limit` entries (the state cap).
    pub fn with_limit(width: usize, limit: u64) -> Self {
        assert!(width > 0, "state width must be positive");
        StateTable {
            width,
            limit,
            identity: Vec::new(),
            meta: Vec::new(),
            slots: vec![EMPTY_SLOT; INITIAL_SLOTS],
        }
    }

    pub fn len(&self) -> usize {
        self.meta.len()
    }

    pub fn is_empty(&self) -> bool {
        self.meta.is_empty()
    }

    pub fn slot_capacity(&self) -> usize {
        self.slots.len()
    }

    pub fn state_width(&self) -> usize {
        self.width
    }

    fn entry_bytes(&self, idx: u32) -> &[u8] {
        let start = idx as usize * self.width;
        &self.identity[start..start + self.width]
    }

    /// Identity bytes of an interned entry.
    pub fn state_bytes(&self, id: EntryId) -> &[u8] {
        self.entry_bytes(id.0)
    }

    pub fn meta(&self, id: EntryId) -> &StateMeta {
        &self.meta[id.index()]
    }

    pub fn meta_mut(&mut self, id: EntryId) -> &mut StateMeta {
        &mut self.meta[id.index()]
    }

    /// Intern identity bytes, returning the entry and whether it was new.
    ///
    /// Idempotent: interning equal bytes again returns the same entry with
    /// `was_absent = false`. New entries carry fresh metadata (BOTTOM map
    /// value, tag 0, no flags).
    pub fn intern(&mut self, bytes: &[u8]) -> Result<(EntryId, bool), StoreError> {
        assert_eq!(bytes.len(), self.width, "interning state of wrong width");
        let mask = self.slots.len() - 1;
        let mut i = (fnv1a64(bytes) as usize) & mask;
        loop {
            let slot = self.slots[i];
            if slot == EMPTY_SLOT {
                break;
            }
            if self.entry_bytes(slot) == bytes {
                return Ok((EntryId(slot), false));
            }
            i = (i + 1) & mask;
        }
        if self.meta.len() as u64 >= self.limit {
            return Err(StoreError::CapacityExceeded { limit: self.limit });
        }
        let idx = self.meta.len() as u32;
        self.identity.extend_from_slice(bytes);
        self.meta.push(StateMeta::fresh());
        self.slots[i] = idx;
        // Resize at load factor 0.75.
        if self.meta.len() * 4 >= self.slots.len() * 3 {
            self.grow();
        }
        Ok((EntryId(idx), true))
    }

    /// Look up without inserting.
    pub fn lookup(&self, bytes: &[u8]) -> Option<EntryId> {
        assert_eq!(bytes.len(), self.width);
        let mask = self.slots.len() - 1;
        let mut i = (fnv1a64(bytes) as usize) & mask;
        loop {
            let slot = self.slots[i];
            if slot == EMPTY_SLOT {
                return None;
            }
            if self.entry_bytes(slot) == bytes {
                return Some(EntryId(slot));
            }
            i = (i + 1) & mask;
        }
    }

    fn grow(&mut self) {
        let new_len = self.slots.len() * 2;
        let mask = new_len - 1;
        let mut slots = vec![EMPTY_SLOT; new_len];
        for idx in 0..self.meta.len() as u32 {
            let mut i = (fnv1a64(self.entry_bytes(idx)) as usize) & mask;
            while slots[i] != EMPTY_SLOT {
                i = (i + 1) & mask;
            }
            slots[i] = idx;
        }
        self.slots = slots;
    }

    /// Iterate interned identity bytes in insertion order.
    pub fn iter_states(&self) -> impl Iterator<Item = &[u8]> + '_ {
        (0..self.meta.len() as u32).map(move |i| self.entry_bytes(i))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::encode_id;
    use proptest::prelude::*;
    use std::collections::HashSet;

    #[test]
    fn intern_is_idempotent() {
        let mut t = StateTable::new(4);
        let e = encode_id(7, 4).unwrap();
        let (a, fresh_a) = t.intern(e.as_bytes()).unwrap();
        let (b, fresh_b) = t.intern(e.as_bytes()).unwrap();
        assert_eq!(a, b);
        assert!(fresh_a);
        assert!(!fresh_b);
        assert_eq!(t.len(), 1);
    }

    #[test]
    fn new_entries_have_fresh_meta() {
        let mut t = StateTable::new(4);
        let (id, _) = t.intern(&[0, 0, 0, 1]).unwrap();
        assert_eq!(
            t.meta(id),
            &StateMeta {
                map_value: None,
                iteration_tag: 0,
                excluded: false,
                dominated: false
            }
        );
    }

    #[test]
    fn hundred_thousand_distinct_states_match_set_reference() {
        let mut t = StateTable::new(4);
        let mut reference = HashSet::new();
        let mut ids = Vec::new();
        for i in 0..100_000u64 {
            let e = encode_id(i.wrapping_mul(2654435761) % (1 << 30), 4).unwrap();
            let (id, fresh) = t.intern(e.as_bytes()).unwrap();
            assert_eq!(fresh, reference.insert(e.clone()), "state {e}");
            ids.push(id);
        }
        assert_eq!(t.len(), reference.len());
        // Load factor bound holds after resizes.
        assert!(t.len() * 4 < t.slot_capacity() * 3);
        // Every interned state is still findable with the same id.
        for (i, e) in reference.iter().enumerate() {
            let _ = i;
            assert!(t.lookup(e.as_bytes()).is_some());
        }
    }

    #[test]
    fn metadata_never_leaks_into_identity() {
        let mut t = StateTable::new(4);
        let a = encode_id(1, 4).unwrap();
        let b = encode_id(2, 4).unwrap();
        let (ia, _) = t.intern(a.as_bytes()).unwrap();
        let (ib, _) = t.intern(b.as_bytes()).unwrap();
        t.meta_mut(ia).map_value = Some(encode_id(9, 4).unwrap());
        t.meta_mut(ia).excluded = true;
        t.meta_mut(ia).dominated = true;
        t.meta_mut(ia).iteration_tag = 42;
        assert_eq!(t.lookup(b.as_bytes()), Some(ib));
        assert_eq!(t.meta(ib), &StateMeta::fresh());
        assert_eq!(t.state_bytes(ia), a.as_bytes());
        let interned: Vec<&[u8]> = t.iter_states().collect();
        assert_eq!(interned, vec![a.as_bytes(), b.as_bytes()]);
    }

    #[test]
    fn capacity_limit_signals_cleanly() {
        let mut t = StateTable::with_limit(4, 2);
        t.intern(&[0, 0, 0, 1]).unwrap();
        t.intern(&[0, 0, 0, 2]).unwrap();
        // Re-interning existing bytes is fine at the limit.
        assert!(t.intern(&[0, 0, 0, 2]).is_ok());
        assert!(matches!(
            t.intern(&[0, 0, 0, 3]),
            Err(StoreError::CapacityExceeded { limit: 2 })
        ));
    }

    #[test]
    fn fnv_reference_vectors() {
        assert_eq!(fnv1a64(b""), 0xcbf2_9ce4_8422_2325);
        assert_eq!(fnv1a64(b"a"), 0xaf63_dc4c_8601_ec8c);
        assert_eq!(fnv1a64(b"foobar"), 0x8594_4171_f739_67e8);
    }

    #[test]
    fn owner_of_empty_input_with_two_workers() {
        // FNV-1a-64 of the empty input is the (odd) offset basis.
        assert_eq!(owner(b"", 2), 1);
    }

    #[test]
    fn single_worker_owns_everything() {
        for i in 0..100u64 {
            assert_eq!(owner(&i.to_be_bytes(), 1), 0);
        }
    }

    #[test]
    fn owner_distribution_is_balanced() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0xfeed);
        let mut buckets = [0u64; 8];
        for _ in 0..100_000 {
            let bytes: [u8; 4] = rng.gen();
            buckets[owner(&bytes, 8)] += 1;
        }
        let max = *buckets.iter().max().unwrap() as f64;
        let min = *buckets.iter().min().unwrap() as f64;
        assert!(max / min <= 1.2, "bucket skew {buckets:?}");
    }

    #[test]
    fn map_order_examples() {
        let e1 = encode_id(1, 4).unwrap();
        let e2 = encode_id(2, 4).unwrap();
        let e4 = encode_id(4, 4).unwrap();
        assert_eq!(map_order(None, Some(&e1)), Ordering::Less);
        // State 4 dominates state 2.
        assert_eq!(map_order(Some(&e4), Some(&e2)), Ordering::Greater);
        assert_eq!(map_order(None, None), Ordering::Equal);
    }

    #[test]
    fn sorting_encodings_yields_numeric_order() {
        let mut encs: Vec<EncodedState> = (0..10u64).map(|i| encode_id(i, 4).unwrap()).collect();
        encs.reverse();
        encs.sort_by(|a, b| map_order(Some(a), Some(b)));
        for (i, e) in encs.iter().enumerate() {
            assert_eq!(e, &encode_id(i as u64, 4).unwrap());
        }
    }

    #[test]
    #[should_panic(expected = "different widths")]
    fn map_order_rejects_mixed_widths() {
        let a = EncodedState::new(vec![1u8]);
        let b = EncodedState::new(vec![1u8, 2]);
        let _ = map_order(Some(&a), Some(&b));
    }

    proptest! {
        #[test]
        fn map_order_is_a_strict_total_order(
            xs in proptest::collection::vec(proptest::option::of(proptest::collection::vec(any::<u8>(), 4)), 3)
        ) {
            let vals: Vec<Option<EncodedState>> =
                xs.into_iter().map(|o| o.map(EncodedState::new)).collect();
            let get = |i: usize| vals[i].as_ref();
            // Antisymmetry.
            for i in 0..3 {
                for j in 0..3 {
                    prop_assert_eq!(map_order(get(i), get(j)), map_order(get(j), get(i)).reverse());
                }
            }
            // Transitivity of <=.
            for i in 0..3 {
                for j in 0..3 {
                    for k in 0..3 {
                        if map_order(get(i), get(j)) != Ordering::Greater
                            && map_order(get(j), get(k)) != Ordering::Greater
                        {
                            prop_assert_ne!(map_order(get(i), get(k)), Ordering::Greater);
                        }
                    }
                }
            }
            // Totality: EQ only for equal values.
            for i in 0..3 {
                for j in 0..3 {
                    if map_order(get(i), get(j)) == Ordering::Equal {
                        prop_assert_eq!(get(i), get(j));
                    }
                }
            }
        }

        #[test]
        fn table_tracks_distinct_inputs(ops in proptest::collection::vec((any::<u16>(), any::<bool>()), 1..200)) {
            let mut t = StateTable::new(4);
            let mut reference = HashSet::new();
            for (raw, poke_meta) in ops {
                let e = encode_id(raw as u64, 4).unwrap();
                let (id, fresh) = t.intern(e.as_bytes()).unwrap();
                prop_assert_eq!(fresh, reference.insert(raw));
                if poke_meta {
                    t.meta_mut(id).dominated = !t.meta(id).dominated;
                    t.meta_mut(id).map_value = Some(e.clone());
                }
            }
            prop_assert_eq!(t.len(), reference.len());
            let mut interned: Vec<u64> = t
                .iter_states()
                .map(|b| u32::from_be_bytes([b[0], b[1], b[2], b[3]]) as u64)
                .collect();
            interned.sort_unstable();
            let mut expect: Vec<u64> = reference.iter().map(|&r| r as u64).collect();
            expect.sort_unstable();
            prop_assert_eq!(interned, expect);
        }
    }
}

//! Automaton-free ground truth for the Tribonacci word.
//!
//! Everything here is computed by direct counting on an explicitly generated
//! prefix of `TR`: Parikh vectors from a prefix-sum table, relative Parikh
//! vectors by sliding a window, abelian complexity as the cardinality of the
//! resulting set. The rest of the crate is checked against this module, so it
//! deliberately shares no code with the automaton side.

use std::collections::BTreeSet;

/// A letter-count triple `(|w|_0, |w|_1, |w|_2)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ParikhVector(pub u64, pub u64, pub u64);

/// An element of the difference set `psi(TR[i..i+n-1]) - psi(TR[0..n-1])`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RelativeVector(pub i64, pub i64, pub i64);

impl RelativeVector {
    pub const ZERO: RelativeVector = RelativeVector(0, 0, 0);
}

impl std::fmt::Display for RelativeVector {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({},{},{})", self.0, self.1, self.2)
    }
}

/// The map `0 -> 01, 1 -> 02, 2 -> 0`, prolongable on `0`.
pub struct Morphism;

impl Morphism {
    pub fn image(letter: u8) -> &'static [u8] {
        match letter {
            0 => &[0, 1],
            1 => &[0, 2],
            2 => &[0],
            _ => panic!("letter out of alphabet: {letter}"),
        }
    }
}

/// Returns the length-`len` prefix of the fixed point of the morphism.
pub fn generate(len: usize) -> Vec<u8> {
    assert!(len >= 1, "prefix length must be positive");
    let mut word = vec![0u8];
    while word.len() < len {
        let mut next = Vec::with_capacity(2 * word.len());
        for &c in &word {
            next.extend_from_slice(Morphism::image(c));
        }
        word = next;
    }
    word.truncate(len);
    word
}

/// A generated prefix of `TR` together with its prefix-sum table, giving
/// O(1) Parikh vectors for any factor inside the prefix.
pub struct TribOracle {
    word: Vec<u8>,
    // prefix[k] = psi(TR[0..k-1]), one entry per k in 0..=len
    prefix: Vec<[u32; 3]>,
}

struct ScanScratch {
    epochs: Vec<u32>,
    counter: u32,
}

thread_local! {
    static SCRATCH: std::cell::RefCell<ScanScratch> = std::cell::RefCell::new(ScanScratch {
        epochs: Vec::new(),
        counter: 0,
    });
}

impl TribOracle {
    pub fn new(len: usize) -> TribOracle {
        let word = generate(len);
        let mut prefix = Vec::with_capacity(len + 1);
        let mut counts = [0u32; 3];
        prefix.push(counts);
        for &c in &word {
            counts[c as usize] += 1;
            prefix.push(counts);
        }
        TribOracle { word, prefix }
    }

    pub fn len(&self) -> usize {
        self.word.len()
    }

    pub fn is_empty(&self) -> bool {
        self.word.is_empty()
    }

    pub fn word(&self) -> &[u8] {
        &self.word
    }

    pub fn letter(&self, i: usize) -> u8 {
        self.word[i]
    }

    /// `psi(TR[0..n-1])`; requires `n <= len`.
    pub fn prefix_parikh(&self, n: usize) -> ParikhVector {
        let p = self.checked_prefix(n);
        ParikhVector(p[0] as u64, p[1] as u64, p[2] as u64)
    }

    /// `psi(TR[i..i+n-1])`; requires `i + n <= len`.
    pub fn factor_parikh(&self, i: usize, n: usize) -> ParikhVector {
        let hi = self.checked_prefix(i + n);
        let lo = self.checked_prefix(i);
        ParikhVector(
            (hi[0] - lo[0]) as u64,
            (hi[1] - lo[1]) as u64,
            (hi[2] - lo[2]) as u64,
        )
    }

    /// `f(i,n) = psi(TR[i..i+n-1]) - psi(TR[0..n-1])`.
    pub fn relative_vector(&self, i: usize, n: usize) -> RelativeVector {
        let hi = self.checked_prefix(i + n);
        let lo = self.checked_prefix(i);
        let base = self.checked_prefix(n);
        RelativeVector(
            hi[0] as i64 - lo[0] as i64 - base[0] as i64,
            hi[1] as i64 - lo[1] as i64 - base[1] as i64,
            hi[2] as i64 - lo[2] as i64 - base[2] as i64,
        )
    }

    /// The set `{f(i,n) : 0 <= i <= window}`.
    ///
    /// The window is asserted adequate by requiring that no vector is first
    /// seen in the second half; callers get an error telling them to enlarge
    /// the window otherwise.
    pub fn relative_set(
        &self,
        n: usize,
        window: usize,
    ) -> Result<BTreeSet<RelativeVector>, WindowError> {
        Ok(self.scan_relative(n, window)?.into_iter().collect())
    }

    /// `|{f(i,n) : 0 <= i <= window}|` with the same stabilization check.
    pub fn abelian_complexity(&self, n: usize, window: usize) -> Result<usize, WindowError> {
        Ok(self.scan_relative(n, window)?.len())
    }

    /// One pass of `f(i,n)` over the window, returning the distinct vectors
    /// in first-seen order. The running vector lives in a packed form
    /// (bias 32, six bits per coordinate) so the hot loop is one table
    /// lookup; each distinct key is decoded and range-checked when first
    /// seen, so a drift outside the packable range cannot pass silently.
    pub fn scan_relative(
        &self,
        n: usize,
        window: usize,
    ) -> Result<Vec<RelativeVector>, WindowError> {
        if window + n + 1 > self.len() {
            return Err(WindowError::PrefixTooShort {
                needed: window + n + 1,
                have: self.len(),
            });
        }
        const FIELD: u32 = 6;
        const KEY_SPACE: usize = 1 << (3 * FIELD);
        const BIAS: i64 = 32;
        const PACK_ZERO: i64 = BIAS | (BIAS << FIELD) | (BIAS << (2 * FIELD));
        const STEP: [i64; 3] = [1, 1 << FIELD, 1 << (2 * FIELD)];
        let decode = |packed: i64| -> RelativeVector {
            RelativeVector(
                (packed & 0x3f) - BIAS,
                ((packed >> FIELD) & 0x3f) - BIAS,
                ((packed >> (2 * FIELD)) & 0x3f) - BIAS,
            )
        };
        SCRATCH.with(|cell| {
            let scratch = &mut *cell.borrow_mut();
            if scratch.epochs.len() != KEY_SPACE {
                scratch.epochs = vec![0u32; KEY_SPACE];
                scratch.counter = 0;
            }
            if scratch.counter == u32::MAX {
                scratch.epochs.fill(0);
                scratch.counter = 0;
            }
            scratch.counter += 1;
            let epoch = scratch.counter;
            let epochs = &mut scratch.epochs;

            // f(0, n) = 0
            let mut packed: i64 = PACK_ZERO;
            let mut found: Vec<RelativeVector> = Vec::new();
            let mut last_new = 0usize;
            for i in 0..=window {
                debug_assert!((0..KEY_SPACE as i64).contains(&packed));
                let slot = &mut epochs[packed as usize];
                if *slot != epoch {
                    *slot = epoch;
                    let v = decode(packed);
                    assert!(
                        v.0.abs() <= 16 && v.1.abs() <= 16 && v.2.abs() <= 16,
                        "relative vector {v} out of packable range at n={n}, i={i}"
                    );
                    found.push(v);
                    last_new = i;
                }
                if i == window {
                    break;
                }
                packed += STEP[self.word[i + n] as usize];
                packed -= STEP[self.word[i] as usize];
            }
            if last_new > window / 2 {
                return Err(WindowError::Unstable {
                    n,
                    window,
                    last_new,
                });
            }
            Ok(found)
        })
    }

    fn checked_prefix(&self, n: usize) -> [u32; 3] {
        assert!(
            n < self.prefix.len(),
            "index {} outside generated prefix of length {}",
            n,
            self.len()
        );
        self.prefix[n]
    }
}

/// Window for a single `relative_set`/`abelian_complexity` query at `n`.
///
/// New vectors have been observed to appear no later than `i ~ 5.3 n`; the
/// sweep window keeps a factor of three on top of that, and the default for
/// one-off queries is far larger still.
pub fn sweep_window(n: usize) -> usize {
    16 * n.max(1) + 64
}

/// Default window for direct calls, deliberately generous.
pub fn default_window(n: usize) -> usize {
    1_000_000usize.max(1000 * n)
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum WindowError {
    #[error("generated prefix too short: need {needed}, have {have}")]
    PrefixTooShort { needed: usize, have: usize },
    #[error(
        "relative set at n={n} not stable within window {window} \
         (new vector first seen at i={last_new}); retry with a larger window"
    )]
    Unstable {
        n: usize,
        window: usize,
        last_new: usize,
    },
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn printed_prefix() {
        assert_eq!(generate(7), vec![0, 1, 0, 2, 0, 1, 0]);
        assert_eq!(generate(2), vec![0, 1]);
    }

    #[test]
    fn prefix_extension() {
        let long = generate(4096);
        let short = generate(2048);
        assert_eq!(&long[..2048], &short[..]);
    }

    #[test]
    fn parikh_of_short_prefix() {
        let o = TribOracle::new(64);
        assert_eq!(o.prefix_parikh(7), ParikhVector(4, 2, 1));
        assert_eq!(o.factor_parikh(0, 7), o.prefix_parikh(7));
        assert_eq!(o.factor_parikh(1, 1), ParikhVector(0, 1, 0));
        assert_eq!(o.prefix_parikh(0), ParikhVector(0, 0, 0));
    }

    #[test]
    fn small_relative_sets() {
        let o = TribOracle::new(1 << 16);
        let a1 = o.relative_set(1, 4096).unwrap();
        let expect1: BTreeSet<_> = [
            RelativeVector(-1, 0, 1),
            RelativeVector(-1, 1, 0),
            RelativeVector(0, 0, 0),
        ]
        .into_iter()
        .collect();
        assert_eq!(a1, expect1);

        let a4 = o.relative_set(4, 4096).unwrap();
        let expect4: BTreeSet<_> = [
            RelativeVector(0, 0, 0),
            RelativeVector(0, 1, -1),
            RelativeVector(1, 0, -1),
        ]
        .into_iter()
        .collect();
        assert_eq!(a4, expect4);

        assert_eq!(o.abelian_complexity(1, 4096).unwrap(), 3);
        assert_eq!(o.abelian_complexity(0, 4096).unwrap(), 1);
    }

    #[test]
    fn complexity_at_3914() {
        let o = TribOracle::new(sweep_window(3914) + 3914 + 1);
        assert_eq!(o.abelian_complexity(3914, sweep_window(3914)).unwrap(), 7);
    }

    #[test]
    fn window_too_short_is_reported() {
        let o = TribOracle::new(128);
        assert!(matches!(
            o.relative_set(10, 4096),
            Err(WindowError::PrefixTooShort { .. })
        ));
    }
}

//! Coalitions as 64-bit player masks.

use std::fmt;

use crate::error::{Error, Result};

/// Hard limit on the number of players a mask can hold.
pub const MAX_PLAYERS: usize = 64;

/// Player index, 0-based internally. Files and CLI output are 1-based.
pub type Player = usize;

/// A set of players. Ordering is by mask value, which is the order used for
/// every "smallest coalition" tie-break in the crate.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Coalition(u64);

impl Coalition {
    pub const EMPTY: Coalition = Coalition(0);

    #[inline]
    pub const fn from_mask(mask: u64) -> Coalition {
        Coalition(mask)
    }

    #[inline]
    pub const fn mask(self) -> u64 {
        self.0
    }

    #[inline]
    pub fn singleton(i: Player) -> Coalition {
        debug_assert!(i < MAX_PLAYERS);
        Coalition(1 << i)
    }

    /// Every player in `0..n`.
    pub fn grand(n: usize) -> Coalition {
        debug_assert!(n <= MAX_PLAYERS);
        if n == MAX_PLAYERS {
            Coalition(u64::MAX)
        } else {
            Coalition((1u64 << n) - 1)
        }
    }

    pub fn from_players<I: IntoIterator<Item = Player>>(players: I) -> Coalition {
        players.into_iter().fold(Coalition::EMPTY, |c, i| c.with(i))
    }

    /// Parses a 1-based player list such as `"1,2"` or `"1|3"`.
    pub fn parse_one_based(s: &str, n: usize) -> Result<Coalition> {
        let mut c = Coalition::EMPTY;
        for tok in s.split([',', '|']).map(str::trim).filter(|t| !t.is_empty()) {
            let p: usize = tok
                .parse()
                .map_err(|_| Error::validation(format!("bad player index {tok:?} in {s:?}")))?;
            if p == 0 || p > n {
                return Err(Error::validation(format!(
                    "player {p} out of range 1..={n} in coalition {s:?}"
                )));
            }
            c = c.with(p - 1);
        }
        Ok(c)
    }

    #[inline]
    pub fn contains(self, i: Player) -> bool {
        i < MAX_PLAYERS && self.0 >> i & 1 == 1
    }

    #[inline]
    pub fn with(self, i: Player) -> Coalition {
        Coalition(self.0 | 1 << i)
    }

    #[inline]
    pub fn without(self, i: Player) -> Coalition {
        Coalition(self.0 & !(1 << i))
    }

    #[inline]
    pub fn union(self, other: Coalition) -> Coalition {
        Coalition(self.0 | other.0)
    }

    #[inline]
    pub fn intersection(self, other: Coalition) -> Coalition {
        Coalition(self.0 & other.0)
    }

    #[inline]
    pub fn difference(self, other: Coalition) -> Coalition {
        Coalition(self.0 & !other.0)
    }

    #[inline]
    pub fn is_subset_of(self, other: Coalition) -> bool {
        self.0 & !other.0 == 0
    }

    #[inline]
    pub fn is_disjoint(self, other: Coalition) -> bool {
        self.0 & other.0 == 0
    }

    #[inline]
    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    #[inline]
    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    /// Lowest-indexed member.
    #[inline]
    pub fn first(self) -> Option<Player> {
        (self.0 != 0).then(|| self.0.trailing_zeros() as usize)
    }

    /// Highest-indexed member.
    #[inline]
    pub fn last(self) -> Option<Player> {
        (self.0 != 0).then(|| 63 - self.0.leading_zeros() as usize)
    }

    /// Members in ascending order.
    pub fn players(self) -> Players {
        Players(self.0)
    }

    /// 1-based member list joined by `sep`, e.g. `"1|2"`.
    pub fn to_one_based(self, sep: &str) -> String {
        self.players()
            .map(|i| (i + 1).to_string())
            .collect::<Vec<_>>()
            .join(sep)
    }

    /// All nonempty subsets of `self`, ascending by mask.
    pub fn subsets(self) -> Subsets {
        Subsets {
            full: self.0,
            next: Some(self.0 & self.0.wrapping_neg()),
        }
    }
}

impl fmt::Debug for Coalition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{}}}", self.to_one_based(","))
    }
}

impl fmt::Display for Coalition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{}}}", self.to_one_based(","))
    }
}

impl FromIterator<Player> for Coalition {
    fn from_iter<I: IntoIterator<Item = Player>>(iter: I) -> Self {
        Coalition::from_players(iter)
    }
}

pub struct Players(u64);

impl Iterator for Players {
    type Item = Player;

    #[inline]
    fn next(&mut self) -> Option<Player> {
        if self.0 == 0 {
            return None;
        }
        let i = self.0.trailing_zeros() as usize;
        self.0 &= self.0 - 1;
        Some(i)
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let k = self.0.count_ones() as usize;
        (k, Some(k))
    }
}

impl ExactSizeIterator for Players {}

/// Ascending enumeration of nonempty submasks.
pub struct Subsets {
    full: u64,
    next: Option<u64>,
}

impl Iterator for Subsets {
    type Item = Coalition;

    fn next(&mut self) -> Option<Coalition> {
        let cur = self.next?;
        if cur == 0 {
            self.next = None;
            return None;
        }
        // next submask in increasing numeric order
        let nxt = (cur | !self.full).wrapping_add(1) & self.full;
        self.next = if nxt == 0 { None } else { Some(nxt) };
        Some(Coalition(cur))
    }
}

/// All nonempty coalitions of `n` players in ascending mask order.
pub fn all_coalitions(n: usize) -> impl Iterator<Item = Coalition> {
    Coalition::grand(n).subsets()
}

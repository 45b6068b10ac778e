//! Small reference games used throughout the tests and examples.

use crate::game::TUGame;

/// Two players, `v({1,2}) = 2`, singletons worth 0.
pub fn g2() -> TUGame {
    TUGame::from_integers(2, &[(&[0, 1], 2)]).expect("valid fixture")
}

/// Three players with a nonempty core: pairs worth 2, grand coalition 3.
/// The unique core allocation is `(1, 1, 1)`.
pub fn g3c() -> TUGame {
    TUGame::from_integers(3, &[(&[0, 1], 2), (&[0, 2], 2), (&[1, 2], 2), (&[0, 1, 2], 3)]).expect("valid fixture")
}

/// Three players with an empty core: pairs and the grand coalition all
/// worth 2.
pub fn g3e() -> TUGame {
    TUGame::from_integers(3, &[(&[0, 1], 2), (&[0, 2], 2), (&[1, 2], 2), (&[0, 1, 2], 2)]).expect("valid fixture")
}

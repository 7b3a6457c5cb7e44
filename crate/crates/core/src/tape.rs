//! Input tapes, head movement, and the end-marker zone abstraction shared by
//! every machine model in the crate.

use std::fmt;

/// A cell of an end-marked input tape.
///
/// Both ends of the tape carry the same marker; a head tells them apart only
/// through its position.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TapeSymbol {
    EndMarker,
    Letter(char),
}

impl TapeSymbol {
    pub fn is_end_marker(self) -> bool {
        matches!(self, TapeSymbol::EndMarker)
    }

    /// Parses the file spelling: `CENT` for the end-marker, a single
    /// character otherwise.
    pub fn parse(token: &str) -> Option<TapeSymbol> {
        if token == "CENT" {
            return Some(TapeSymbol::EndMarker);
        }
        let mut chars = token.chars();
        match (chars.next(), chars.next()) {
            (Some(c), None) => Some(TapeSymbol::Letter(c)),
            _ => None,
        }
    }
}

impl fmt::Display for TapeSymbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TapeSymbol::EndMarker => f.write_str("CENT"),
            TapeSymbol::Letter(c) => write!(f, "{c}"),
        }
    }
}

/// One head movement.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Move {
    Left,
    Stay,
    Right,
}

impl Move {
    pub const ALL: [Move; 3] = [Move::Left, Move::Stay, Move::Right];

    pub fn delta(self) -> i64 {
        match self {
            Move::Left => -1,
            Move::Stay => 0,
            Move::Right => 1,
        }
    }

    pub fn parse(token: &str) -> Option<Move> {
        match token {
            "-1" => Some(Move::Left),
            "0" => Some(Move::Stay),
            "+1" | "1" => Some(Move::Right),
            _ => None,
        }
    }
}

impl fmt::Display for Move {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Move::Left => "-1",
            Move::Stay => "0",
            Move::Right => "+1",
        })
    }
}

/// Movement discipline of a head.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum HeadMode {
    TwoWay,
    OneWay,
    RealTime,
}

impl HeadMode {
    pub fn allows(self, mv: Move) -> bool {
        match self {
            HeadMode::TwoWay => true,
            HeadMode::OneWay => mv != Move::Left,
            HeadMode::RealTime => mv == Move::Right,
        }
    }

    pub fn parse(token: &str) -> Option<HeadMode> {
        match token {
            "two-way" => Some(HeadMode::TwoWay),
            "one-way" => Some(HeadMode::OneWay),
            "real-time" => Some(HeadMode::RealTime),
            _ => None,
        }
    }

    /// Heads that can never move left.
    pub fn is_one_way(self) -> bool {
        !matches!(self, HeadMode::TwoWay)
    }
}

impl fmt::Display for HeadMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            HeadMode::TwoWay => "two-way",
            HeadMode::OneWay => "one-way",
            HeadMode::RealTime => "real-time",
        })
    }
}

/// The string `x` laid out between two end-markers. Position 0 and `n + 1`
/// hold the markers.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Tape {
    cells: Vec<TapeSymbol>,
}

impl Tape {
    pub fn new(input: &str) -> Tape {
        let mut cells = Vec::with_capacity(input.chars().count() + 2);
        cells.push(TapeSymbol::EndMarker);
        cells.extend(input.chars().map(TapeSymbol::Letter));
        cells.push(TapeSymbol::EndMarker);
        Tape { cells }
    }

    /// Length of the input proper, without markers.
    pub fn input_len(&self) -> usize {
        self.cells.len() - 2
    }

    /// Index of the right end-marker.
    pub fn right_end(&self) -> usize {
        self.cells.len() - 1
    }

    pub fn at(&self, pos: usize) -> TapeSymbol {
        self.cells[pos]
    }

    /// Applies `mv` at `pos`. A move past either end-marker leaves the head
    /// where it is.
    pub fn shift(&self, pos: usize, mv: Move) -> usize {
        match mv {
            Move::Left if pos == 0 => 0,
            Move::Left => pos - 1,
            Move::Stay => pos,
            Move::Right if pos == self.right_end() => pos,
            Move::Right => pos + 1,
        }
    }

    /// Whether `mv` at `pos` would leave the tape.
    pub fn escapes(&self, pos: usize, mv: Move) -> bool {
        (pos == 0 && mv == Move::Left) || (pos == self.right_end() && mv == Move::Right)
    }
}

/// Input-independent abstraction of a head position: on the left marker, on
/// some letter, or on the right marker.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub(crate) enum Zone {
    Left,
    Interior,
    Right,
}

impl Zone {
    pub(crate) fn admits(self, sym: TapeSymbol) -> bool {
        match self {
            Zone::Interior => !sym.is_end_marker(),
            Zone::Left | Zone::Right => sym.is_end_marker(),
        }
    }

    /// Zones reachable after `mv`, or `None` when the move leaves the tape.
    pub(crate) fn after(self, mv: Move) -> Option<&'static [Zone]> {
        use Zone::*;
        match (self, mv) {
            (z, Move::Stay) => Some(match z {
                Left => &[Left],
                Interior => &[Interior],
                Right => &[Right],
            }),
            (Left, Move::Left) | (Right, Move::Right) => None,
            (Left | Interior, Move::Right) => Some(&[Interior, Right]),
            (Interior | Right, Move::Left) => Some(&[Left, Interior]),
        }
    }
}

/// Every string over `alphabet` of length at most `max_len`, shortest first
/// and lexicographic within a length.
pub fn strings_up_to(alphabet: &[char], max_len: usize) -> Vec<String> {
    let mut out = vec![String::new()];
    let mut layer = vec![String::new()];
    for _ in 0..max_len {
        let mut next = Vec::with_capacity(layer.len() * alphabet.len());
        for prefix in &layer {
            for &c in alphabet {
                let mut s = prefix.clone();
                s.push(c);
                next.push(s);
            }
        }
        out.extend(next.iter().cloned());
        layer = next;
    }
    out
}

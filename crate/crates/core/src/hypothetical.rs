//! A minimal two-character reference scheme on a 6×6 grid: the response set
//! of a PPI is every character strictly between its two cells. Used as a
//! cross-check for the identification logic and for PRS overlap examples.

use std::collections::BTreeSet;

use crate::error::{HbatError, Result};
use crate::geometry::{cells_on_segment, GridPoint};

pub const HYPO_SIDE: i32 = 6;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HypoGrid {
    cells: Vec<char>,
}

impl HypoGrid {
    /// Six rows of six characters, top row first.
    pub fn from_rows(rows: &[&str]) -> Result<Self> {
        let cells: Vec<char> = rows.iter().flat_map(|r| r.chars()).collect();
        if rows.len() != HYPO_SIDE as usize || rows.iter().any(|r| r.chars().count() != HYPO_SIDE as usize) {
            return Err(HbatError::InvalidParameters("grid must be 6 rows of 6 characters".into()));
        }
        let distinct: BTreeSet<char> = cells.iter().copied().collect();
        if distinct.len() != cells.len() {
            return Err(HbatError::InvalidParameters("grid characters must be distinct".into()));
        }
        Ok(Self { cells })
    }

    pub fn position(&self, c: char) -> Result<GridPoint> {
        self.cells
            .iter()
            .position(|&x| x == c)
            .map(|i| GridPoint::from_index(i, HYPO_SIDE))
            .ok_or(HbatError::UnknownCharacter(c))
    }

    pub fn at(&self, p: GridPoint) -> char {
        self.cells[p.index(HYPO_SIDE)]
    }
}

/// Characters on the open segment between the two PPI characters.
pub fn hypo_prs(grid: &HypoGrid, ppi: [char; 2]) -> Result<BTreeSet<char>> {
    if ppi[0] == ppi[1] {
        return Err(HbatError::InvalidParameters("PPI characters must differ".into()));
    }
    let (p, q) = (grid.position(ppi[0])?, grid.position(ppi[1])?);
    Ok(cells_on_segment(p, q)?.into_iter().map(|c| grid.at(c)).collect())
}

//! Collect-then-release simultaneous broadcast.
//!
//! A trusted synchronizer stands in for the simultaneous broadcast channel:
//! it reveals nothing until all voters have committed their columns, then
//! releases the whole matrix at once. Toy cryptographic realizations are out
//! of scope here; the protocol's fairness argument only needs the atomic
//! release ordering, which the transcript records.

use crate::error::{Error, Result};

use super::VoteMatrix;

pub struct SimultaneousBroadcast {
    m: usize,
    boxes: usize,
    columns: Vec<Option<Vec<u8>>>,
}

impl SimultaneousBroadcast {
    /// Synchronizer for `voters` columns of `boxes` entries each, in `Z_m`.
    pub fn new(voters: usize, boxes: usize, m: usize) -> Self {
        Self {
            m,
            boxes,
            columns: vec![None; voters],
        }
    }

    /// Commit one voter's updated column. Nothing becomes visible to anyone
    /// until release.
    pub fn submit(&mut self, voter: usize, column: Vec<u8>) -> Result<()> {
        if voter >= self.columns.len() {
            return Err(Error::Validation(format!(
                "voter {voter} out of range for {} voters",
                self.columns.len()
            )));
        }
        if column.len() != self.boxes || column.iter().any(|&v| (v as usize) >= self.m) {
            return Err(Error::Validation(format!(
                "column for voter {voter} is not {} entries of Z_{}",
                self.boxes, self.m
            )));
        }
        if self.columns[voter].is_some() {
            return Err(Error::Validation(format!(
                "voter {voter} already submitted"
            )));
        }
        self.columns[voter] = Some(column);
        Ok(())
    }

    /// Atomic release: the full matrix, or a timeout naming the holdouts.
    pub fn release(&self) -> Result<VoteMatrix> {
        let missing: Vec<usize> = self
            .columns
            .iter()
            .enumerate()
            .filter(|(_, c)| c.is_none())
            .map(|(k, _)| k)
            .collect();
        if !missing.is_empty() {
            return Err(Error::BroadcastTimeout { missing });
        }
        let mut cells = vec![vec![0u8; self.columns.len()]; self.boxes];
        for (voter, column) in self.columns.iter().enumerate() {
            for (row, &value) in column.as_ref().unwrap().iter().enumerate() {
                cells[row][voter] = value;
            }
        }
        VoteMatrix::new(cells, self.m)
    }
}

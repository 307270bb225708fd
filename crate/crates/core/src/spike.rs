use alloc::vec;
use alloc::vec::Vec;

/// Firing indicators of one population for one tick.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SpikePattern {
    fired: Vec<bool>,
}

impl SpikePattern {
    pub fn silent(len: usize) -> Self {
        SpikePattern {
            fired: vec![false; len],
        }
    }

    pub fn one_hot(len: usize, index: usize) -> Self {
        let mut p = Self::silent(len);
        if index < len {
            p.fired[index] = true;
        }
        p
    }

    pub fn from_bools(fired: Vec<bool>) -> Self {
        SpikePattern { fired }
    }

    pub fn len(&self) -> usize {
        self.fired.len()
    }

    pub fn is_empty(&self) -> bool {
        self.fired.is_empty()
    }

    pub fn fired(&self) -> &[bool] {
        &self.fired
    }

    pub fn count(&self) -> usize {
        self.fired.iter().filter(|&&f| f).count()
    }

    pub fn is_one_hot(&self) -> bool {
        self.count() == 1
    }

    /// The single firing index, if exactly one neuron fired.
    pub fn winner(&self) -> Option<usize> {
        if self.is_one_hot() {
            self.fired.iter().position(|&f| f)
        } else {
            None
        }
    }

    /// Indices of every firing neuron.
    pub fn active(&self) -> impl Iterator<Item = usize> + '_ {
        self.fired
            .iter()
            .enumerate()
            .filter_map(|(i, &f)| f.then_some(i))
    }
}

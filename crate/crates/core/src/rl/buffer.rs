use ndarray::Array2;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Transition {
    pub observation: Vec<f64>,
    pub pre_squash: Vec<f64>,
    /// Log-probability under the parameters that generated the action.
    pub log_prob: f64,
    pub reward: f64,
    pub value: f64,
    /// The episode ended on this transition.
    pub done: bool,
}

/// Fixed-capacity trajectory store. Transitions may span several episodes;
/// `done` flags separate them.
#[derive(Debug, Clone)]
pub struct RolloutBuffer {
    capacity: usize,
    transitions: Vec<Transition>,
}

impl RolloutBuffer {
    pub fn new(capacity: usize) -> Self {
        RolloutBuffer {
            capacity,
            transitions: Vec::with_capacity(capacity),
        }
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.transitions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.transitions.is_empty()
    }

    pub fn is_full(&self) -> bool {
        self.transitions.len() >= self.capacity
    }

    pub fn push(&mut self, transition: Transition) -> Result<()> {
        if self.is_full() {
            return Err(Error::InvalidConfig(format!(
                "rollout buffer already holds {} transitions",
                self.capacity
            )));
        }
        self.transitions.push(transition);
        Ok(())
    }

    pub fn clear(&mut self) {
        self.transitions.clear();
    }

    pub fn transitions(&self) -> &[Transition] {
        &self.transitions
    }

    pub(crate) fn require_full(&self) -> Result<()> {
        if self.is_full() {
            Ok(())
        } else {
            Err(Error::BufferNotFull {
                len: self.len(),
                capacity: self.capacity,
            })
        }
    }

    pub(crate) fn stack<F: Fn(&Transition) -> &[f64]>(&self, idx: &[usize], field: F) -> Array2<f64> {
        let width = field(&self.transitions[idx[0]]).len();
        let mut out = Array2::zeros((idx.len(), width));
        for (r, &i) in idx.iter().enumerate() {
            out.row_mut(r)
                .iter_mut()
                .zip(field(&self.transitions[i]))
                .for_each(|(o, v)| *o = *v);
        }
        out
    }
}

//! Finite labelled transition systems.
//!
//! States and labels are dense indices into the system; labels are interned
//! strings. Successor and predecessor images are precomputed per
//! (state, label) pair so that evaluation and partition refinement never
//! rescan the transition list.

use std::fmt;

use thiserror::Error;

/// Index of a state in a [`FiniteLts`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct StateId(pub usize);

/// Index into the label table of a [`FiniteLts`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LabelId(pub usize);

impl fmt::Display for StateId {
    fn fmt(&self, f: &mut fmt::Formatter) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl fmt::Display for LabelId {
    fn fmt(&self, f: &mut fmt::Formatter) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Error constructing a [`FiniteLts`].
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LtsBuildError {
    #[error("transition ({0}, {1:?}, {2}) uses unknown label {1:?}")]
    UnknownLabel(usize, String, usize),
    #[error("transition ({src}, label {label}, {dst}) mentions state {bad}, but there are only {num_states} states")]
    StateOutOfRange {
        src: usize,
        label: usize,
        dst: usize,
        bad: usize,
        num_states: usize,
    },
    #[error("transition ({src}, label {label}, {dst}) uses label index {label}, but there are only {num_labels} labels")]
    LabelOutOfRange {
        src: usize,
        label: usize,
        dst: usize,
        num_labels: usize,
    },
    #[error("label {0:?} appears twice in the label table")]
    DuplicateLabel(String),
}

/// An explicit finite labelled transition system.
///
/// The system is immutable after construction. Transitions are stored
/// sorted and deduplicated; [`image`](FiniteLts::image) and
/// [`preimage`](FiniteLts::preimage) are slice lookups.
#[derive(Clone, PartialEq, Eq)]
pub struct FiniteLts {
    num_states: usize,
    labels: Vec<String>,
    transitions: Vec<(StateId, LabelId, StateId)>,
    // successor / predecessor images, indexed by state * num_labels + label
    forward: Vec<Vec<StateId>>,
    backward: Vec<Vec<StateId>>,
}

impl FiniteLts {
    /// Builds a system from named transitions.
    ///
    /// Every label in `labels` must be distinct; transitions may repeat
    /// (duplicates collapse) but must mention known labels and states
    /// `< num_states`.
    pub fn build(
        num_states: usize,
        labels: &[&str],
        transitions: &[(usize, &str, usize)],
    ) -> Result<FiniteLts, LtsBuildError> {
        let owned: Vec<String> = labels.iter().map(|s| s.to_string()).collect();
        let mut indexed = Vec::with_capacity(transitions.len());
        for &(src, name, dst) in transitions {
            let label = owned
                .iter()
                .position(|l| l == name)
                .ok_or_else(|| LtsBuildError::UnknownLabel(src, name.to_string(), dst))?;
            indexed.push((src, label, dst));
        }
        FiniteLts::from_parts(num_states, owned, indexed)
    }

    /// Builds a system from transitions with pre-interned label indices.
    pub fn from_parts(
        num_states: usize,
        labels: Vec<String>,
        transitions: impl IntoIterator<Item = (usize, usize, usize)>,
    ) -> Result<FiniteLts, LtsBuildError> {
        for (i, name) in labels.iter().enumerate() {
            if labels[..i].contains(name) {
                return Err(LtsBuildError::DuplicateLabel(name.clone()));
            }
        }
        let num_labels = labels.len();
        let mut sorted: Vec<(StateId, LabelId, StateId)> = Vec::new();
        for (src, label, dst) in transitions {
            if label >= num_labels {
                return Err(LtsBuildError::LabelOutOfRange {
                    src,
                    label,
                    dst,
                    num_labels,
                });
            }
            let bad = if src >= num_states {
                Some(src)
            } else if dst >= num_states {
                Some(dst)
            } else {
                None
            };
            if let Some(bad) = bad {
                return Err(LtsBuildError::StateOutOfRange {
                    src,
                    label,
                    dst,
                    bad,
                    num_states,
                });
            }
            sorted.push((StateId(src), LabelId(label), StateId(dst)));
        }
        sorted.sort_unstable();
        sorted.dedup();

        let mut forward = vec![Vec::new(); num_states * num_labels];
        let mut backward = vec![Vec::new(); num_states * num_labels];
        for &(src, label, dst) in &sorted {
            forward[src.0 * num_labels + label.0].push(dst);
            backward[dst.0 * num_labels + label.0].push(src);
        }
        // forward images come out sorted because `sorted` is; backward do not
        for image in &mut backward {
            image.sort_unstable();
        }
        Ok(FiniteLts {
            num_states,
            labels,
            transitions: sorted,
            forward,
            backward,
        })
    }

    pub fn num_states(&self) -> usize {
        self.num_states
    }

    pub fn num_labels(&self) -> usize {
        self.labels.len()
    }

    pub fn num_transitions(&self) -> usize {
        self.transitions.len()
    }

    /// All states, in increasing order.
    pub fn states(&self) -> impl Iterator<Item = StateId> {
        (0..self.num_states).map(StateId)
    }

    /// All labels, in table order.
    pub fn label_ids(&self) -> impl Iterator<Item = LabelId> {
        (0..self.labels.len()).map(LabelId)
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    /// The name interned for `label`.
    ///
    /// Panics if `label` is out of range.
    pub fn label_name(&self, label: LabelId) -> &str {
        &self.labels[label.0]
    }

    /// Looks a label up by name.
    pub fn label_id(&self, name: &str) -> Option<LabelId> {
        self.labels.iter().position(|l| l == name).map(LabelId)
    }

    pub fn contains_state(&self, state: StateId) -> bool {
        state.0 < self.num_states
    }

    /// Transitions, sorted by (source, label, target) and duplicate-free.
    pub fn transitions(&self) -> &[(StateId, LabelId, StateId)] {
        &self.transitions
    }

    /// The `label`-successors of `state`, sorted and duplicate-free.
    ///
    /// Panics if `state` or `label` is out of range.
    pub fn image(&self, state: StateId, label: LabelId) -> &[StateId] {
        assert!(state.0 < self.num_states, "state {state} out of range");
        assert!(
            label.0 < self.labels.len(),
            "label index {label} out of range"
        );
        &self.forward[state.0 * self.labels.len() + label.0]
    }

    /// The `label`-predecessors of `state`, sorted and duplicate-free.
    ///
    /// Panics if `state` or `label` is out of range.
    pub fn preimage(&self, state: StateId, label: LabelId) -> &[StateId] {
        assert!(state.0 < self.num_states, "state {state} out of range");
        assert!(
            label.0 < self.labels.len(),
            "label index {label} out of range"
        );
        &self.backward[state.0 * self.labels.len() + label.0]
    }

    /// Whether `src --label--> dst` is a transition of the system.
    pub fn has_transition(&self, src: StateId, label: LabelId, dst: StateId) -> bool {
        self.image(src, label).binary_search(&dst).is_ok()
    }
}

impl fmt::Debug for FiniteLts {
    fn fmt(&self, f: &mut fmt::Formatter) -> fmt::Result {
        f.debug_struct("FiniteLts")
            .field("num_states", &self.num_states)
            .field("labels", &self.labels)
            .field("transitions", &self.transitions)
            .finish()
    }
}

impl fmt::Display for FiniteLts {
    fn fmt(&self, f: &mut fmt::Formatter) -> fmt::Result {
        writeln!(
            f,
            "lts with {} states, {} labels, {} transitions",
            self.num_states,
            self.labels.len(),
            self.transitions.len()
        )?;
        for &(src, label, dst) in &self.transitions {
            writeln!(f, "  {} --{}--> {}", src, self.label_name(label), dst)?;
        }
        Ok(())
    }
}

//! SMIR epidemic engine.
//!
//! * [`meanfield`]: the six-compartment ODE system with homophily.
//! * [`infonet`]: retweet networks, single-step linear-threshold
//!   misinformation spreading and alignment label propagation.
//! * [`contactnet`]: county-structured contact networks built from a
//!   mobility matrix with a stochastic-block-model style edge draw.
//! * [`abm`]: discrete-time agent-based SMIR on a contact network.
//! * [`scenario`]: file formats and synthetic scenario generation.

pub mod abm;
pub mod contactnet;
pub mod infonet;
pub mod meanfield;
pub mod rng;
pub mod scenario;

use std::fmt;

use serde::{Deserialize, Serialize};

/// Behavioural subpopulation of an individual.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[repr(u8)]
pub enum Label {
    Ordinary = 0,
    Misinformed = 1,
}

impl Label {
    pub fn index(self) -> usize {
        self as usize
    }

    pub fn is_misinformed(self) -> bool {
        self == Label::Misinformed
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Label::Ordinary => "O",
            Label::Misinformed => "M",
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Party {
    Republican,
    Democrat,
}

impl Party {
    /// Party implied by a political alignment score; zero has no party.
    pub fn from_alignment(alignment: f64) -> Option<Party> {
        if alignment > 0.0 {
            Some(Party::Republican)
        } else if alignment < 0.0 {
            Some(Party::Democrat)
        } else {
            None
        }
    }

    pub fn index(self) -> usize {
        match self {
            Party::Republican => 0,
            Party::Democrat => 1,
        }
    }

    pub fn other(self) -> Party {
        match self {
            Party::Republican => Party::Democrat,
            Party::Democrat => Party::Republican,
        }
    }
}

impl fmt::Display for Party {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Party::Republican => "Republican",
            Party::Democrat => "Democrat",
        })
    }
}

//! Two-atom channel labels `|S, m_S, l, m_l, n>` and truncated bases.

use std::collections::HashMap;
use std::fmt;

use crate::error::Error;
use crate::Result;

/// Partial waves kept in the truncated basis.
pub const PARTIAL_WAVES: [i64; 2] = [0, 2];

/// `|S, m_S, l, m_l, n>`: total spin, its projection on the static field,
/// partial wave and projection, Floquet photon index.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Channel {
    pub s: i64,
    pub m_s: i64,
    pub l: i64,
    pub m_l: i64,
    pub n: i64,
}

impl Channel {
    pub fn new(s: i64, m_s: i64, l: i64, m_l: i64, n: i64) -> Result<Self> {
        let c = Self { s, m_s, l, m_l, n };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.s == 0 || self.s == 1) {
            return Err(Error::invalid(
                "S",
                format!("must be 0 or 1, got {}", self.s),
            ));
        }
        if self.m_s.abs() > self.s {
            return Err(Error::invalid(
                "m_S",
                format!("|{}| exceeds S = {}", self.m_s, self.s),
            ));
        }
        if self.l < 0 || self.l % 2 != 0 {
            return Err(Error::invalid(
                "l",
                format!("must be even and >= 0, got {}", self.l),
            ));
        }
        if self.m_l.abs() > self.l {
            return Err(Error::invalid(
                "m_l",
                format!("|{}| exceeds l = {}", self.m_l, self.l),
            ));
        }
        Ok(())
    }

    /// Incoming s-wave channel `|1, -1, 0, 0, n>`.
    pub fn entrance(n: i64) -> Self {
        Self {
            s: 1,
            m_s: -1,
            l: 0,
            m_l: 0,
            n,
        }
    }

    /// `m_S + m_l`, conserved by the dipolar coupling.
    pub fn projection(&self) -> i64 {
        self.m_s + self.m_l
    }

    /// `(m_S + m_l + n) mod 2`, conserved by every term of the Hamiltonian.
    pub fn parity(&self) -> i64 {
        (self.m_s + self.m_l + self.n).rem_euclid(2)
    }
}

impl fmt::Display for Channel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "|S={}, mS={}, l={}, ml={}, n={}>",
            self.s, self.m_s, self.l, self.m_l, self.n
        )
    }
}

/// `max(8, ceil(3 |Omega/w|))`.
pub fn default_n_max(ratio: f64) -> i64 {
    8.max((3.0 * ratio.abs()).ceil() as i64)
}

/// Ordered channel list with an index lookup.
#[derive(Clone, Debug)]
pub struct ChannelBasis {
    channels: Vec<Channel>,
    index: HashMap<Channel, usize>,
    n_max: i64,
}

impl ChannelBasis {
    /// Triplet channels with `l in {0, 2}`, `|n| <= n_max`, in the parity block
    /// of the entrance channel.
    pub fn triplet(n_max: i64) -> Result<Self> {
        Self::triplet_block(n_max, Channel::entrance(0).parity())
    }

    pub fn triplet_block(n_max: i64, parity: i64) -> Result<Self> {
        if n_max < 1 {
            return Err(Error::invalid(
                "n_max",
                format!("must be >= 1, got {n_max}"),
            ));
        }
        let mut channels = Vec::new();
        for n in -n_max..=n_max {
            for m_s in -1..=1 {
                for l in PARTIAL_WAVES {
                    for m_l in -l..=l {
                        let c = Channel {
                            s: 1,
                            m_s,
                            l,
                            m_l,
                            n,
                        };
                        if c.parity() == parity.rem_euclid(2) {
                            channels.push(c);
                        }
                    }
                }
            }
        }
        Self::from_channels(channels, n_max)
    }

    /// Arbitrary channel list; duplicates and `|n| > n_max` are rejected.
    pub fn from_channels(channels: Vec<Channel>, n_max: i64) -> Result<Self> {
        let mut index = HashMap::with_capacity(channels.len());
        for (i, c) in channels.iter().enumerate() {
            c.validate()?;
            if c.n.abs() > n_max {
                return Err(Error::invalid(
                    "basis",
                    format!("{c} lies outside |n| <= {n_max}"),
                ));
            }
            if index.insert(*c, i).is_some() {
                return Err(Error::invalid("basis", format!("duplicate channel {c}")));
            }
        }
        if channels.is_empty() {
            return Err(Error::invalid("basis", "empty"));
        }
        Ok(Self {
            channels,
            index,
            n_max,
        })
    }

    pub fn channels(&self) -> &[Channel] {
        &self.channels
    }

    pub fn len(&self) -> usize {
        self.channels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.channels.is_empty()
    }

    pub fn n_max(&self) -> i64 {
        self.n_max
    }

    pub fn index_of(&self, c: &Channel) -> Option<usize> {
        self.index.get(c).copied()
    }

    /// Every channel reachable by one rf photon step or one dipolar
    /// transition within the kept partial waves and `|n| <= n_max` must be present.
    pub fn check_closed(&self) -> Result<()> {
        for c in &self.channels {
            for p in coupled_partners(c) {
                if p.n.abs() <= self.n_max && self.index_of(&p).is_none() {
                    return Err(Error::BasisNotClosed(format!("{c} couples to missing {p}")));
                }
            }
        }
        Ok(())
    }
}

/// Channels with a structurally non-zero coupling to `c`.
fn coupled_partners(c: &Channel) -> Vec<Channel> {
    let mut out = Vec::new();
    if c.s == 0 {
        return out;
    }
    for dm in [-1, 1] {
        let m_s = c.m_s + dm;
        if m_s.abs() <= c.s {
            for dn in [-1, 1] {
                out.push(Channel {
                    m_s,
                    n: c.n + dn,
                    ..*c
                });
            }
        }
    }
    for l in PARTIAL_WAVES {
        for m_s in -c.s..=c.s {
            let m_l = c.projection() - m_s;
            if m_l.abs() > l {
                continue;
            }
            let p = Channel { m_s, l, m_l, ..*c };
            if p != *c && super::hamiltonian::angular_factor(c, &p) != 0.0 {
                out.push(p);
            }
        }
    }
    out
}

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

/// How regulation and spinning reserve use a unit's headroom.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CapacityOption {
    /// Energy, regulation and spinning stack additively.
    NonSharing,
    /// Regulation and spinning may occupy the same headroom.
    Sharing,
}

/// Whether faster reserve may count toward slower requirements.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RequirementOption {
    NonCascading,
    Cascading,
}

/// One of the four reserve-modeling variants.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VariantConfig {
    pub capacity: CapacityOption,
    pub requirements: RequirementOption,
}

impl VariantConfig {
    pub const NS_NC: VariantConfig = VariantConfig {
        capacity: CapacityOption::NonSharing,
        requirements: RequirementOption::NonCascading,
    };
    pub const NS_C: VariantConfig = VariantConfig {
        capacity: CapacityOption::NonSharing,
        requirements: RequirementOption::Cascading,
    };
    pub const S_NC: VariantConfig = VariantConfig {
        capacity: CapacityOption::Sharing,
        requirements: RequirementOption::NonCascading,
    };
    pub const S_C: VariantConfig = VariantConfig {
        capacity: CapacityOption::Sharing,
        requirements: RequirementOption::Cascading,
    };

    /// All four variants in canonical order.
    pub const ALL: [VariantConfig; 4] = [Self::NS_NC, Self::NS_C, Self::S_NC, Self::S_C];

    pub fn name(self) -> &'static str {
        match (self.capacity, self.requirements) {
            (CapacityOption::NonSharing, RequirementOption::NonCascading) => "NS-NC",
            (CapacityOption::NonSharing, RequirementOption::Cascading) => "NS-C",
            (CapacityOption::Sharing, RequirementOption::NonCascading) => "S-NC",
            (CapacityOption::Sharing, RequirementOption::Cascading) => "S-C",
        }
    }

    pub fn is_sharing(self) -> bool {
        self.capacity == CapacityOption::Sharing
    }

    pub fn is_cascading(self) -> bool {
        self.requirements == RequirementOption::Cascading
    }
}

impl fmt::Display for VariantConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Error)]
#[error("unknown variant `{0}` (expected NS-NC, NS-C, S-NC or S-C)")]
pub struct ParseVariantError(pub String);

impl FromStr for VariantConfig {
    type Err = ParseVariantError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        VariantConfig::ALL
            .into_iter()
            .find(|v| v.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| ParseVariantError(s.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_names_round_trip() {
        for v in VariantConfig::ALL {
            assert_eq!(v.name().parse::<VariantConfig>().unwrap(), v);
        }
        assert_eq!(
            VariantConfig::ALL.map(|v| v.name()),
            ["NS-NC", "NS-C", "S-NC", "S-C"]
        );
    }

    #[test]
    fn rejects_unknown_name() {
        assert!("S-X".parse::<VariantConfig>().is_err());
    }
}

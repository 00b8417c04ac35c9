use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use crate::rng::Stream;
use crate::scene::{ObjectAsset, Provenance, SemanticClass};
use crate::{Error, Result};

/// Relative odds of drawing a generated vs. an external asset.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(deny_unknown_fields))]
pub struct MixWeights {
    pub generated: f64,
    pub external: f64,
}

impl Default for MixWeights {
    fn default() -> Self {
        Self {
            generated: 1.0,
            external: 1.0,
        }
    }
}

impl MixWeights {
    fn validate(&self) -> Result<()> {
        let ok = |w: f64| w >= 0.0 && w.is_finite();
        if !ok(self.generated) || !ok(self.external) || self.generated + self.external == 0.0 {
            return Err(Error::InvalidConfig(alloc::format!(
                "mix weights must be non-negative and not all zero, got ({}, {})",
                self.generated,
                self.external
            )));
        }
        Ok(())
    }
}

/// Immutable pool of insertable objects.
#[derive(Debug, Clone, PartialEq)]
pub struct ObjectBank {
    assets: Vec<ObjectAsset>,
    by_class: BTreeMap<SemanticClass, Vec<usize>>,
    generated: Vec<usize>,
    external: Vec<usize>,
    weights: MixWeights,
}

impl ObjectBank {
    pub fn new(assets: Vec<ObjectAsset>, weights: MixWeights) -> Result<Self> {
        weights.validate()?;
        let mut by_class: BTreeMap<SemanticClass, Vec<usize>> = BTreeMap::new();
        let mut generated = Vec::new();
        let mut external = Vec::new();
        for (i, a) in assets.iter().enumerate() {
            if a.cloud.is_empty() {
                return Err(Error::EmptyCloud);
            }
            by_class.entry(a.class.clone()).or_default().push(i);
            match a.provenance {
                Provenance::Generated => generated.push(i),
                Provenance::External => external.push(i),
            }
        }
        Ok(Self {
            assets,
            by_class,
            generated,
            external,
            weights,
        })
    }

    pub fn assets(&self) -> &[ObjectAsset] {
        &self.assets
    }

    pub fn weights(&self) -> MixWeights {
        self.weights
    }

    pub fn len(&self) -> usize {
        self.assets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.assets.is_empty()
    }

    pub fn of_class(&self, class: &SemanticClass) -> impl Iterator<Item = &ObjectAsset> {
        self.by_class
            .get(class)
            .into_iter()
            .flatten()
            .map(|&i| &self.assets[i])
    }

    /// Picks a source by the mix weights (sources without assets get weight
    /// zero), then an asset of that source uniformly.
    pub fn draw(&self, stream: &mut Stream) -> Result<&ObjectAsset> {
        let weight = |w: f64, pool: &[usize]| if pool.is_empty() { 0.0 } else { w };
        let wg = weight(self.weights.generated, &self.generated);
        let we = weight(self.weights.external, &self.external);
        let u = stream.next_f64();
        if wg + we == 0.0 {
            return Err(Error::EmptyBank);
        }
        let pool = if u * (wg + we) < wg {
            &self.generated
        } else {
            &self.external
        };
        let i = stream.below(pool.len() as u64) as usize;
        Ok(&self.assets[pool[i]])
    }
}

use std::path::Path;
use std::sync::Arc;

use super::{FiniteModel, GaussModel, MpInducedModel, SharedModel};
use crate::error::{Error, Result};

/// A shipped model instance, kept concrete so that model-specific potentials
/// can be attached to it.
#[derive(Debug, Clone)]
pub enum LoadedModel {
    Gauss(Arc<GaussModel>),
    Mp(Arc<MpInducedModel>),
    Finite(Arc<FiniteModel>),
}

impl LoadedModel {
    pub fn shared(&self) -> SharedModel {
        match self {
            LoadedModel::Gauss(m) => m.clone(),
            LoadedModel::Mp(m) => m.clone(),
            LoadedModel::Finite(m) => m.clone(),
        }
    }

    pub fn id(&self) -> String {
        self.shared().id()
    }
}

/// Resolve `gauss`, `mp:<beta>`, `mp:<beta>:<cutoff>` or `finite:<file>`.
pub fn model_from_id(id: &str) -> Result<LoadedModel> {
    let id = id.trim();
    if id == "gauss" {
        return Ok(LoadedModel::Gauss(Arc::new(GaussModel::new())));
    }
    if let Some(rest) = id.strip_prefix("mp:") {
        let mut parts = rest.split(':');
        let beta = parts
            .next()
            .and_then(|b| b.parse::<f64>().ok())
            .ok_or_else(|| Error::UnknownModel(id.to_string()))?;
        let model = match parts.next() {
            None => MpInducedModel::new(beta)?,
            Some(c) => {
                let cutoff = c.parse::<usize>().map_err(|_| Error::UnknownModel(id.to_string()))?;
                MpInducedModel::with_cutoff(beta, cutoff)?
            }
        };
        if parts.next().is_some() {
            return Err(Error::UnknownModel(id.to_string()));
        }
        return Ok(LoadedModel::Mp(Arc::new(model)));
    }
    if let Some(path) = id.strip_prefix("finite:") {
        return Ok(LoadedModel::Finite(Arc::new(FiniteModel::load(Path::new(path))?)));
    }
    Err(Error::UnknownModel(id.to_string()))
}

//! Stochastic gradient descent with classical momentum and per-group
//! learning rates.

use crate::error::{Error, Result};
use crate::model::loss::TrainConfig;
use crate::model::mlp::{MlpParams, ParamGroup};

pub struct SgdMomentum {
    velocity: MlpParams,
}

impl SgdMomentum {
    pub fn new(params: &MlpParams) -> SgdMomentum {
        SgdMomentum { velocity: params.zeros_like() }
    }

    /// velocity = momentum * velocity + gradient; params -= lr_group * velocity.
    pub fn step(
        &mut self,
        params: &mut MlpParams,
        grads: &MlpParams,
        cfg: &TrainConfig,
    ) -> Result<()> {
        for (((p, group), (v, _)), (g, _)) in params
            .tensors_mut()
            .into_iter()
            .zip(self.velocity.tensors_mut())
            .zip(grads.tensors())
        {
            let lr = match group {
                ParamGroup::Trunk => cfg.lr_trunk,
                ParamGroup::AttrHead => cfg.lr_attr,
                ParamGroup::EmbedHead => cfg.lr_embed,
            };
            for ((pv, vv), &gv) in p.data.iter_mut().zip(v.data.iter_mut()).zip(&g.data) {
                *vv = cfg.momentum * *vv + gv;
                *pv -= lr * *vv;
            }
        }
        if !params.is_finite() {
            return Err(Error::NumericFailure("non-finite parameter after update".into()));
        }
        Ok(())
    }
}

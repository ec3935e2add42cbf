//! Reference workloads and published macro configurations.

use serde::{Deserialize, Serialize};

use crate::macro_model::{ImcMacroConfig, ImcType};
use crate::workload::{Layer, Network, NetworkLayer};

/// Autoencoder fully-connected layer.
pub fn fc_layer() -> Layer {
    Layer::new(128, 640, 1, 1, 1, 1)
}

/// MobileNet pointwise layer.
pub fn pw_layer() -> Layer {
    Layer::new(64, 64, 12, 12, 1, 1)
}

/// DS-CNN depthwise layer.
pub fn dw_layer() -> Layer {
    Layer::new(1, 1, 25, 5, 3, 3).with_groups(64)
}

/// ResNet8 convolution.
pub fn conv_layer() -> Layer {
    Layer::new(16, 16, 32, 32, 3, 3)
}

/// The four benchmark layers as `(name, layer)`.
pub fn benchmark_layers() -> [(&'static str, Layer); 4] {
    [
        ("fc", fc_layer()),
        ("pw", pw_layer()),
        ("dw", dw_layer()),
        ("conv", conv_layer()),
    ]
}

pub fn benchmark_network() -> Network {
    let layers = benchmark_layers()
        .into_iter()
        .map(|(name, layer)| NetworkLayer {
            name: name.to_string(),
            layer,
            repeat: 1,
        })
        .collect();
    Network::new("benchmark-layers", layers).expect("fixture layers are valid")
}

/// One silicon-validated macro configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationDesign {
    pub index: usize,
    pub config: ImcMacroConfig,
}

/// The seven published 22/28nm designs used for model validation, evaluated
/// at 50% input toggle rate and 50% weight sparsity. Designs that insert a
/// pipeline stage in the adder path are marked pipelined.
pub fn validation_designs() -> Vec<ValidationDesign> {
    #[allow(clippy::type_complexity)]
    let rows: [(ImcType, u32, u32, u32, u64, u64, u64, u64, bool); 7] = [
        (ImcType::Aimc, 7, 2, 7, 1024, 512, 1, 1, false),
        (ImcType::Aimc, 8, 8, 2, 16, 12, 32, 1, true),
        (ImcType::Aimc, 8, 8, 1, 64, 256, 1, 8, false),
        (ImcType::Dimc, 8, 8, 2, 32, 6, 1, 64, false),
        (ImcType::Dimc, 8, 8, 1, 32, 1, 16, 2, true),
        (ImcType::Dimc, 8, 8, 2, 128, 8, 8, 8, false),
        (ImcType::Dimc, 8, 8, 1, 128, 8, 2, 4, true),
    ];
    rows.into_iter()
        .enumerate()
        .map(
            |(i, (imc_type, b_i, b_w, b_cycle, d_i, d_o, m, n_macros, pipelined))| {
                ValidationDesign {
                    index: i + 1,
                    config: ImcMacroConfig {
                        imc_type,
                        b_i,
                        b_w,
                        b_cycle,
                        d_i,
                        d_o,
                        m,
                        n_macros,
                        input_toggle_rate: 0.5,
                        weight_sparsity: 0.5,
                        pipelined,
                        b_o: 8,
                    },
                }
            },
        )
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::workload::parse_network;
    use std::path::Path;

    #[test]
    fn shipped_data_files_match_fixtures() {
        let text = include_str!("../data/benchmark_layers.json");
        let net = parse_network(text, Path::new("benchmark_layers.json")).unwrap();
        assert_eq!(net.layers.len(), 4);
        for (nl, (name, layer)) in net.layers.iter().zip(benchmark_layers()) {
            assert_eq!(nl.name, name);
            assert_eq!(nl.layer, layer);
        }
        for (name, file) in [
            ("fc", include_str!("../data/layers/fc.json")),
            ("pw", include_str!("../data/layers/pw.json")),
            ("dw", include_str!("../data/layers/dw.json")),
            ("conv", include_str!("../data/layers/conv.json")),
        ] {
            let net = parse_network(file, Path::new(name)).unwrap();
            let expected = benchmark_layers()
                .into_iter()
                .find(|(n, _)| *n == name)
                .unwrap()
                .1;
            assert_eq!(net.layers[0].layer, expected);
        }
    }

    #[test]
    fn validation_designs_are_valid() {
        let designs = validation_designs();
        assert_eq!(designs.len(), 7);
        for d in &designs {
            d.config.validate().unwrap();
        }
        let first = &designs[0].config;
        assert_eq!(
            (first.imc_type, first.b_i, first.b_w, first.b_cycle),
            (ImcType::Aimc, 7, 2, 7)
        );
        assert_eq!((first.d_i, first.d_o, first.m, first.n_macros), (1024, 512, 1, 1));
    }
}

use crate::emulation::{
    encode_pipeline, map_to_grids, solve_payload, CodingPipeline, EmulationError, PhaseTargets,
    PipelineConfig,
};
use crate::waveform::{NrsPattern, Qpsk, ResourceGrid, OFF_SYMBOL, ON_SYMBOL, SUBCARRIERS};

use super::LinkError;

pub const SYNC_SYMBOLS: [usize; 5] = [0, 1, 2, 3, 4];
pub const INFO_SYMBOLS: [usize; 5] = [7, 8, 9, 10, 11];
pub const INFO_BITS: usize = 5;

/// One NBPU: five ON sync symbols, then five OOK info symbols carrying
/// `info` MSB first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct NbpuFrame {
    info: u8,
}

impl NbpuFrame {
    pub fn new(info: u8) -> Result<Self, LinkError> {
        if info >= 1 << INFO_BITS {
            return Err(LinkError::InfoTooLarge(u32::from(info)));
        }
        Ok(Self { info })
    }

    pub fn info(&self) -> u8 {
        self.info
    }

    pub fn info_bits(&self) -> [bool; INFO_BITS] {
        std::array::from_fn(|i| self.info >> (INFO_BITS - 1 - i) & 1 == 1)
    }

    /// Phase vector of each of the ten NBPU symbols.
    pub fn symbols(&self) -> Vec<(usize, [Qpsk; SUBCARRIERS])> {
        let bits = self.info_bits();
        SYNC_SYMBOLS
            .iter()
            .map(|&s| (s, ON_SYMBOL))
            .chain(
                INFO_SYMBOLS
                    .iter()
                    .zip(bits)
                    .map(|(&s, b)| (s, if b { ON_SYMBOL } else { OFF_SYMBOL })),
            )
            .collect()
    }

    pub fn targets(&self) -> PhaseTargets {
        PhaseTargets::from_symbols(&self.symbols())
    }

    /// Grid as it would appear if the phases were set directly.
    pub fn ideal_grid(&self, nrs: NrsPattern) -> Result<ResourceGrid, LinkError> {
        let mut g = ResourceGrid::new(nrs)?;
        for (s, row) in self.symbols() {
            g.set_symbol(s, &row)?;
        }
        Ok(g)
    }

    /// Grid produced by emulation: solve for a payload, run it through the
    /// real coding chain, and take the NBPU subframe.
    pub fn emulated_grid(&self, model: &CodingPipeline) -> Result<ResourceGrid, LinkError> {
        let payload = solve_payload(&self.targets(), model)?;
        let cfg: &PipelineConfig = &model.config;
        let coded = encode_pipeline(&payload, cfg)?;
        let grids = map_to_grids(&coded, cfg)?;
        grids
            .into_iter()
            .nth(cfg.nbpu_subframe)
            .ok_or_else(|| EmulationError::Config("no NBPU subframe".into()).into())
    }
}

/// `assemble_frame` in bit form: the ten-symbol phase-target set.
pub fn assemble_frame(info: u8) -> Result<PhaseTargets, LinkError> {
    Ok(NbpuFrame::new(info)?.targets())
}

/// What the five info bits mean to the surface.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InfoEncoding {
    /// Direct codebook / SSB index.
    BeamId,
    /// Index into a pre-shared schedule table.
    ScheduleIndex,
}

/// Timed configuration changes for one surface within a period.
#[derive(Debug, Clone, PartialEq)]
pub struct ReconfigInfo {
    pub surface_id: u8,
    /// (seconds within the period, beam id), strictly increasing in time.
    pub entries: Vec<(f64, u16)>,
}

impl ReconfigInfo {
    pub fn validate(&self) -> Result<(), LinkError> {
        if self.entries.is_empty() {
            return Err(LinkError::InvalidInfo("no entries".into()));
        }
        if self.entries.windows(2).any(|w| w[1].0 <= w[0].0) {
            return Err(LinkError::InvalidInfo(
                "entry times must strictly increase".into(),
            ));
        }
        if self
            .entries
            .iter()
            .any(|e| !(0.0..crate::waveform::PERIOD_S).contains(&e.0))
        {
            return Err(LinkError::InvalidInfo(
                "entry time outside the period".into(),
            ));
        }
        Ok(())
    }

    /// Five-bit value: the beam id of a single-entry schedule, or the
    /// caller-supplied table index otherwise.
    pub fn encode(&self, encoding: InfoEncoding, table_index: Option<u8>) -> Result<u8, LinkError> {
        self.validate()?;
        let v = match (encoding, table_index) {
            (InfoEncoding::BeamId, _) if self.entries.len() == 1 => u32::from(self.entries[0].1),
            (InfoEncoding::BeamId, _) => {
                return Err(LinkError::InvalidInfo(
                    "multi-entry schedules need a table index".into(),
                ));
            }
            (InfoEncoding::ScheduleIndex, Some(i)) => u32::from(i),
            (InfoEncoding::ScheduleIndex, None) => {
                return Err(LinkError::InvalidInfo("missing table index".into()))
            }
        };
        if v >= 1 << INFO_BITS {
            return Err(LinkError::InfoTooLarge(v));
        }
        Ok(v as u8)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::emulation::build_affine_model;

    #[test]
    fn all_ones_is_all_on() {
        let t = assemble_frame(0b11111).unwrap();
        assert_eq!(t, PhaseTargets::uniform(ON_SYMBOL));
    }

    #[test]
    fn all_zeros_is_sync_then_off() {
        let f = NbpuFrame::new(0).unwrap();
        for (s, row) in f.symbols() {
            assert_eq!(row, if s < 5 { ON_SYMBOL } else { OFF_SYMBOL });
        }
    }

    #[test]
    fn nrs_symbols_untouched() {
        for info in 0..32 {
            let t = assemble_frame(info).unwrap();
            t.validate().unwrap();
            assert!(t
                .entries
                .iter()
                .all(|(s, _, _)| ![5, 6, 12, 13].contains(s)));
        }
        assert!(matches!(
            NbpuFrame::new(32),
            Err(LinkError::InfoTooLarge(32))
        ));
    }

    #[test]
    fn emulated_grid_carries_the_frame() {
        let model = build_affine_model(&PipelineConfig::default()).unwrap();
        let f = NbpuFrame::new(0b10110).unwrap();
        let g = f.emulated_grid(&model).unwrap();
        for (s, row) in f.symbols() {
            for (c, &q) in row.iter().enumerate() {
                assert_eq!(g.get(s, c), q);
            }
        }
    }

    #[test]
    fn reconfig_info_encoding() {
        let one = ReconfigInfo {
            surface_id: 1,
            entries: vec![(0.005, 17)],
        };
        assert_eq!(one.encode(InfoEncoding::BeamId, None).unwrap(), 17);
        let two = ReconfigInfo {
            surface_id: 1,
            entries: vec![(0.005, 1), (0.0125, 2)],
        };
        assert!(two.encode(InfoEncoding::BeamId, None).is_err());
        assert_eq!(two.encode(InfoEncoding::ScheduleIndex, Some(3)).unwrap(), 3);
        let bad = ReconfigInfo {
            surface_id: 1,
            entries: vec![(0.01, 1), (0.005, 2)],
        };
        assert!(bad.validate().is_err());
        let big = ReconfigInfo {
            surface_id: 1,
            entries: vec![(0.0, 40)],
        };
        assert!(matches!(
            big.encode(InfoEncoding::BeamId, None),
            Err(LinkError::InfoTooLarge(40))
        ));
    }
}

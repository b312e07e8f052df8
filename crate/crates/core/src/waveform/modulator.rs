use std::f64::consts::PI;

use num_complex::Complex64;

use super::grid::{ResourceGrid, SUBCARRIERS, SYMBOLS_PER_SUBFRAME};
use super::WaveformError;

pub const SUBCARRIER_SPACING_HZ: f64 = 15_000.0;
/// Basic time unit of the LTE numerology, 1/30.72 MHz.
pub const BASIC_RATE_HZ: f64 = 30_720_000.0;
pub const BASIC_FFT: i64 = 2048;
pub const SUBFRAME_UNITS: i64 = 30_720;
pub const SUBFRAME_S: f64 = 1e-3;
/// Default baseband rate, 256 samples per useful symbol.
pub const DEFAULT_SAMPLE_RATE_HZ: f64 = 3_840_000.0;

const CP_FIRST_UNITS: i64 = 160;
const CP_OTHER_UNITS: i64 = 144;
const SYMBOLS_PER_SLOT: usize = 7;

/// Baseband frequency of subcarrier `c`. The 12 subcarriers sit on integer
/// bins -6..=5 so the cyclic prefix stays a true cyclic extension.
pub fn subcarrier_offset_hz(c: usize) -> f64 {
    (c as f64 - 6.0) * SUBCARRIER_SPACING_HZ
}

pub fn subcarrier_bin(c: usize) -> i64 {
    c as i64 - 6
}

/// Normal-CP symbol timing inside one subframe, in basic time units.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SymbolTiming {
    /// Start of the cyclic prefix.
    pub start: i64,
    pub cp: i64,
}

impl SymbolTiming {
    pub fn useful_start(self) -> i64 {
        self.start + self.cp
    }

    pub fn end(self) -> i64 {
        self.start + self.cp + BASIC_FFT
    }
}

pub fn symbol_timing(symbol: usize) -> SymbolTiming {
    assert!(
        symbol < SYMBOLS_PER_SUBFRAME,
        "symbol index {symbol} out of range"
    );
    let slot = (symbol / SYMBOLS_PER_SLOT) as i64;
    let l = symbol % SYMBOLS_PER_SLOT;
    let slot_start = slot * SUBFRAME_UNITS / 2;
    let start = if l == 0 {
        slot_start
    } else {
        slot_start + CP_FIRST_UNITS + BASIC_FFT + (l as i64 - 1) * (CP_OTHER_UNITS + BASIC_FFT)
    };
    let cp = if l == 0 {
        CP_FIRST_UNITS
    } else {
        CP_OTHER_UNITS
    };
    SymbolTiming { start, cp }
}

pub fn units_to_s(units: i64) -> f64 {
    units as f64 / BASIC_RATE_HZ
}

/// Useful-part start of `symbol` relative to the subframe start, in seconds.
pub fn useful_start_s(symbol: usize) -> f64 {
    units_to_s(symbol_timing(symbol).useful_start())
}

pub fn useful_symbol_s() -> f64 {
    1.0 / SUBCARRIER_SPACING_HZ
}

#[derive(Debug, Clone)]
pub struct BasebandSignal {
    pub samples: Vec<Complex64>,
    pub sample_rate: f64,
    /// Absolute time of sample 0.
    pub t0: f64,
}

impl BasebandSignal {
    pub fn duration(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate
    }

    pub fn mean_power(&self) -> f64 {
        if self.samples.is_empty() {
            return 0.0;
        }
        self.samples.iter().map(|s| s.norm_sqr()).sum::<f64>() / self.samples.len() as f64
    }

    pub fn time_of(&self, index: usize) -> f64 {
        self.t0 + index as f64 / self.sample_rate
    }
}

/// OFDM modulator configuration. `fft_size` must be a multiple of 256 so CP
/// lengths are whole samples.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModulatorConfig {
    pub fft_size: usize,
}

impl Default for ModulatorConfig {
    fn default() -> Self {
        Self { fft_size: 256 }
    }
}

impl ModulatorConfig {
    pub fn oversampled(factor: usize) -> Self {
        Self {
            fft_size: 256 * factor,
        }
    }

    pub fn sample_rate(&self) -> f64 {
        self.fft_size as f64 * SUBCARRIER_SPACING_HZ
    }

    fn validate(&self) -> Result<(), WaveformError> {
        if self.fft_size == 0 || !self.fft_size.is_multiple_of(256) {
            return Err(WaveformError::InvalidConfig(format!(
                "fft_size {} is not a positive multiple of 256",
                self.fft_size
            )));
        }
        Ok(())
    }

    /// Samples per basic time unit denominator: units * fft / 2048.
    fn units_to_samples(&self, units: i64) -> usize {
        (units * self.fft_size as i64 / BASIC_FFT) as usize
    }

    pub fn samples_per_subframe(&self) -> usize {
        self.units_to_samples(SUBFRAME_UNITS)
    }

    /// Sample index of the first useful sample of `symbol`.
    pub fn useful_start_sample(&self, symbol: usize) -> usize {
        self.units_to_samples(symbol_timing(symbol).useful_start())
    }
}

/// One OFDM symbol (useful part only) from per-subcarrier coefficients.
pub fn modulate_symbol(coeffs: &[Complex64; SUBCARRIERS], fft_size: usize) -> Vec<Complex64> {
    let n = fft_size as f64;
    (0..fft_size)
        .map(|i| {
            coeffs
                .iter()
                .enumerate()
                .map(|(c, &a)| {
                    a * Complex64::from_polar(
                        1.0,
                        2.0 * PI * subcarrier_bin(c) as f64 * i as f64 / n,
                    )
                })
                .sum()
        })
        .collect()
}

/// Unit-amplitude coefficients for a row of phases.
pub fn unit_coeffs(phases: &[f64; SUBCARRIERS]) -> [Complex64; SUBCARRIERS] {
    phases.map(|phi| Complex64::from_polar(1.0, phi))
}

/// Modulates a full subframe with normal cyclic prefixes. The result spans
/// exactly 1 ms and starts at `t0`.
pub fn modulate_subframe(
    grid: &ResourceGrid,
    cfg: &ModulatorConfig,
    t0: f64,
) -> Result<BasebandSignal, WaveformError> {
    cfg.validate()?;
    let mut samples = Vec::with_capacity(cfg.samples_per_subframe());
    for s in 0..SYMBOLS_PER_SUBFRAME {
        let body = modulate_symbol(&unit_coeffs(&grid.symbol_radians(s)), cfg.fft_size);
        let cp = cfg.units_to_samples(symbol_timing(s).cp);
        samples.extend_from_slice(&body[cfg.fft_size - cp..]);
        samples.extend_from_slice(&body);
    }
    debug_assert_eq!(samples.len(), cfg.samples_per_subframe());
    Ok(BasebandSignal {
        samples,
        sample_rate: cfg.sample_rate(),
        t0,
    })
}

/// Recovers per-RE phases by a per-symbol DFT on the useful part, with a
/// nearest-constellation decision.
pub fn demodulate_subframe(
    sig: &BasebandSignal,
    cfg: &ModulatorConfig,
    nrs: super::grid::NrsPattern,
) -> Result<ResourceGrid, WaveformError> {
    cfg.validate()?;
    if sig.samples.len() < cfg.samples_per_subframe() {
        return Err(WaveformError::InvalidGrid(
            "signal shorter than one subframe".into(),
        ));
    }
    let mut grid = ResourceGrid::new(nrs)?;
    let n = cfg.fft_size as f64;
    for s in 0..SYMBOLS_PER_SUBFRAME {
        let start = cfg.useful_start_sample(s);
        let body = &sig.samples[start..start + cfg.fft_size];
        for c in 0..SUBCARRIERS {
            if grid.is_nrs(s, c) {
                continue;
            }
            let k = subcarrier_bin(c) as f64;
            let acc: Complex64 = body
                .iter()
                .enumerate()
                .map(|(i, &x)| x * Complex64::from_polar(1.0, -2.0 * PI * k * i as f64 / n))
                .sum();
            grid.set(s, c, super::grid::Qpsk::nearest(acc.arg()))?;
        }
    }
    Ok(grid)
}

/// Continuous-time view of one subframe: evaluates the band-limited
/// waveform at arbitrary instants, optionally through a per-subcarrier
/// complex response (e.g. a receive filter).
#[derive(Debug, Clone)]
pub struct SubframeWaveform {
    symbols: [[Complex64; SUBCARRIERS]; SYMBOLS_PER_SUBFRAME],
}

impl SubframeWaveform {
    pub fn new(grid: &ResourceGrid) -> Self {
        Self::with_response(grid, &[Complex64::new(1.0, 0.0); SUBCARRIERS])
    }

    pub fn with_response(grid: &ResourceGrid, response: &[Complex64; SUBCARRIERS]) -> Self {
        let mut symbols = [[Complex64::new(0.0, 0.0); SUBCARRIERS]; SYMBOLS_PER_SUBFRAME];
        for (s, row) in symbols.iter_mut().enumerate() {
            for (c, v) in row.iter_mut().enumerate() {
                *v = response[c] * Complex64::from_polar(1.0, grid.get(s, c).radians());
            }
        }
        Self { symbols }
    }

    /// Symbol index containing subframe-relative time `t`, or `None` outside
    /// [0, 1 ms).
    pub fn symbol_at(t: f64) -> Option<usize> {
        if !(0.0..SUBFRAME_S).contains(&t) {
            return None;
        }
        let u = (t * BASIC_RATE_HZ).floor() as i64;
        (0..SYMBOLS_PER_SUBFRAME).find(|&s| u < symbol_timing(s).end())
    }

    /// Complex baseband value at subframe-relative time `t`; zero outside
    /// the subframe.
    pub fn eval(&self, t: f64) -> Complex64 {
        match Self::symbol_at(t) {
            Some(s) => self.eval_symbol(s, t - useful_start_s(s)),
            None => Complex64::new(0.0, 0.0),
        }
    }

    /// Value of symbol `s` at time `u` relative to its useful start. Valid
    /// for `u` in [-CP, T_u) and periodic in `u`.
    pub fn eval_symbol(&self, s: usize, u: f64) -> Complex64 {
        self.symbols[s]
            .iter()
            .enumerate()
            .map(|(c, &a)| a * Complex64::from_polar(1.0, 2.0 * PI * subcarrier_offset_hz(c) * u))
            .sum()
    }
}

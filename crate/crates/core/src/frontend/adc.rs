use super::filter::Envelope;
use super::FrontendError;

pub const GAIN_MIN_DB: f64 = 40.0;
pub const GAIN_MAX_DB: f64 = 68.0;
/// One sample per NB-IoT symbol: 280 symbols every 20 ms.
pub const NBPU_ADC_RATE_HZ: f64 = 280.0 / 20e-3;
pub const DIRECT_ADC_RATE_HZ: f64 = 3.84e6;

/// Sample-rate (power proxy) saving of the slow ADC over direct sampling.
pub fn adc_rate_ratio() -> f64 {
    DIRECT_ADC_RATE_HZ / NBPU_ADC_RATE_HZ
}

/// Amplifier plus low-rate ADC that samples at arbitrary instants.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Adc {
    pub gain_db: f64,
    /// Quantiser resolution; `None` keeps full precision.
    pub bits: Option<u32>,
    /// Clipping level of the quantiser, after gain.
    pub full_scale: f64,
}

impl Adc {
    pub fn new(gain_db: f64) -> Result<Self, FrontendError> {
        if !(GAIN_MIN_DB..=GAIN_MAX_DB).contains(&gain_db) {
            return Err(FrontendError::Config(format!(
                "gain {gain_db} dB outside [40, 68] dB"
            )));
        }
        Ok(Self {
            gain_db,
            bits: None,
            full_scale: f64::INFINITY,
        })
    }

    pub fn with_quantizer(mut self, bits: u32, full_scale: f64) -> Self {
        self.bits = Some(bits);
        self.full_scale = full_scale;
        self
    }

    pub fn amplitude_gain(&self) -> f64 {
        10f64.powf(self.gain_db / 20.0)
    }

    fn quantize(&self, v: f64) -> f64 {
        match self.bits {
            None => v,
            Some(b) => {
                let levels = (1u64 << b) as f64;
                let step = 2.0 * self.full_scale / levels;
                let q = (v / step).round() * step;
                q.clamp(-self.full_scale, self.full_scale - step)
            }
        }
    }

    /// Amplified samples at exactly the requested instants, linearly
    /// interpolated from the dense trace. Instants on the grid (within
    /// 1e-6 of a sample) return that sample unchanged.
    pub fn sample(&self, env: &Envelope, times: &[f64]) -> Result<Vec<f64>, FrontendError> {
        let g = self.amplitude_gain();
        times
            .iter()
            .map(|&t| Ok(self.quantize(g * interpolate(env, t)?)))
            .collect()
    }
}

pub fn interpolate(env: &Envelope, t: f64) -> Result<f64, FrontendError> {
    let last = env
        .samples
        .len()
        .checked_sub(1)
        .ok_or(FrontendError::TimeOutOfRange { t })?;
    let x = (t - env.t0) * env.sample_rate;
    let near = x.round();
    if (x - near).abs() < 1e-6 && near >= 0.0 && near as usize <= last {
        return Ok(env.samples[near as usize]);
    }
    if !(0.0..=last as f64).contains(&x) {
        return Err(FrontendError::TimeOutOfRange { t });
    }
    let i = (x.floor() as usize).min(last - 1);
    let f = x - i as f64;
    Ok(env.samples[i] * (1.0 - f) + env.samples[i + 1] * f)
}

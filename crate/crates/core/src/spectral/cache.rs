use std::collections::HashMap;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, Mutex, MutexGuard, OnceLock};

use crate::error::Result;
use crate::scalar::Scalar;

use super::fft::Fft2d;
use super::{build_dipole_spectra, build_green_spectrum, DipoleSpectra, GreenSpectrum};

type Slot<V> = Arc<OnceLock<Arc<V>>>;

/// Size-keyed store of FFT plans and Green spectra.
///
/// Lookups are safe from any thread. Each spectrum is built at most once per
/// size; concurrent requests for the same size wait on the first builder
/// while other sizes proceed independently.
pub struct SpectrumCache<T: Scalar> {
    ffts: Mutex<HashMap<(usize, usize), Arc<Fft2d<T>>>>,
    greens: Mutex<HashMap<(usize, usize), Slot<GreenSpectrum<T>>>>,
    dipoles: Mutex<HashMap<(usize, usize), Slot<DipoleSpectra<T>>>>,
    builds: AtomicUsize,
}

impl<T: Scalar> Default for SpectrumCache<T> {
    fn default() -> Self {
        Self::new()
    }
}

fn lock<V>(m: &Mutex<V>) -> MutexGuard<'_, V> {
    m.lock().unwrap_or_else(|poisoned| poisoned.into_inner())
}

impl<T: Scalar> SpectrumCache<T> {
    pub fn new() -> Self {
        Self {
            ffts: Mutex::new(HashMap::new()),
            greens: Mutex::new(HashMap::new()),
            dipoles: Mutex::new(HashMap::new()),
            builds: AtomicUsize::new(0),
        }
    }

    pub fn fft(&self, height: usize, width: usize) -> Arc<Fft2d<T>> {
        lock(&self.ffts)
            .entry((height, width))
            .or_insert_with(|| Arc::new(Fft2d::new(height, width)))
            .clone()
    }

    /// Green spectrum of the 5-point Laplacian for a padded size.
    pub fn green(&self, height: usize, width: usize) -> Result<Arc<GreenSpectrum<T>>> {
        let slot = lock(&self.greens).entry((height, width)).or_default().clone();
        get_or_try_init(&slot, height, width, || {
            self.builds.fetch_add(1, Ordering::Relaxed);
            build_green_spectrum(height, width)
        })
    }

    pub fn dipoles(&self, height: usize, width: usize) -> Result<Arc<DipoleSpectra<T>>> {
        let slot = lock(&self.dipoles).entry((height, width)).or_default().clone();
        get_or_try_init(&slot, height, width, || {
            self.builds.fetch_add(1, Ordering::Relaxed);
            build_dipole_spectra(height, width)
        })
    }

    /// Number of spectra built so far (Green and dipole).
    pub fn build_count(&self) -> usize {
        self.builds.load(Ordering::Relaxed)
    }
}

fn get_or_try_init<V>(
    slot: &OnceLock<Arc<V>>,
    height: usize,
    width: usize,
    build: impl FnOnce() -> Result<V>,
) -> Result<Arc<V>> {
    if let Some(v) = slot.get() {
        return Ok(v.clone());
    }
    // the only failure mode is an undersized grid; reject it before the slot
    // is touched so a bad request never poisons it
    super::check_min_size(height, width)?;
    Ok(slot
        .get_or_init(|| Arc::new(build().expect("size validated before building")))
        .clone())
}

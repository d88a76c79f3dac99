#pragma once

#include <string>

#include "mra/forward.hpp"
#include "mra/mps.hpp"
#include "mra/signal.hpp"

namespace mra::io {

// Dataset file, little-endian: magic "MRA1", u32 L, u64 N, f64 sigma2,
// u64 seed, u8 has_shifts, N*L f64 observations, optional N u32 shifts.
void write_dataset(const forward::MraDataset& d, const std::string& path);
forward::MraDataset read_dataset(const std::string& path);

// CSV export for small datasets (one observation per row).
void write_dataset_csv(const forward::MraDataset& d, const std::string& path);

// Statistics file "MST1": header, sample mean, non-redundant power spectrum,
// optional bispectrum (re/im f64 pairs, row-major).
void write_stats(const forward::SampleStats& s, const std::string& path);
forward::SampleStats read_stats(const std::string& path);

// Plain-text signal: comment header with L, one %.17g value per line.
void write_signal(const Signal& x, const std::string& path);
Signal read_signal(const std::string& path);

// Posterior batch "PBS1": header + config echo, J*L f64 samples, medoid
// index, J u32 alignment shifts.
void write_posterior_batch(const mps::PosteriorBatch& b, const std::string& path);
mps::PosteriorBatch read_posterior_batch(const std::string& path);

// Summary CSV: component, mean, q05, q50, q95, variance.
void write_summary_csv(const mps::PosteriorSummary& s, const std::string& path);

}  // namespace mra::io

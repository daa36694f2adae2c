#pragma once

#include <span>
#include <vector>

#include "wic/distiller/model.hpp"
#include "wic/mode.hpp"

namespace wic::objective {

using distiller::DistilledPair;

template <class T>
struct SampleRepresentation {
  std::vector<T> target;      // y, p or n: mean of the selected MLM layers
  DistilledPair<T> distilled;  // meaning / context of the same word
};

template <class T>
struct TripleRepresentations {
  SampleRepresentation<T> original;
  SampleRepresentation<T> positive;
  SampleRepresentation<T> negative;
  Mode mode = Mode::monolingual;
  bool use_negatives = true;
};

// dL/d(meaning), dL/d(context) for each of the three samples. Loss
// functions add into these, so callers zero them first.
template <class T>
struct TripleGradients {
  DistilledPair<T> original;
  DistilledPair<T> positive;
  DistilledPair<T> negative;

  static TripleGradients zeros(std::size_t d);
};

template <class T>
struct LossBreakdown {
  T reconstruction = 0;
  T cross = 0;
  T total() const { return reconstruction + cross; }
};

// (1/d)·‖target − reconstructed‖²
template <class T>
T recon_loss(std::span<const T> target, std::span<const T> reconstructed);

// Monolingual cross-reconstruction:
//   Pool(h^m, p^c) → p,  Pool(p^m, h^c) → y,  Pool(n^m, h^c) → n,  Pool(h^m, n^c) → y
template <class T>
T cross_loss_mono(const TripleRepresentations<T>& reps, TripleGradients<T>* grads = nullptr);

// Crosslingual cross-reconstruction:
//   Pool(h^m, p^c) → p,  Pool(p^m, h^c) → y,  Pool(h^m, n^c) → p,  Pool(n^m, p^c) → n
template <class T>
T cross_loss_xl(const TripleRepresentations<T>& reps, TripleGradients<T>* grads = nullptr);

// Reconstruction of all three samples plus the mode's cross term. With
// use_negatives=false every term that reads the negative sample is dropped.
template <class T>
LossBreakdown<T> total_loss(const TripleRepresentations<T>& reps, TripleGradients<T>* grads = nullptr);

}  // namespace wic::objective

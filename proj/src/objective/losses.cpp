#include "wic/objective/losses.hpp"

#include <string>

#include "wic/util/errors.hpp"

namespace wic::objective {

namespace {

// One reconstruction term: target ≈ (a + b) / 2.
template <class T>
struct Term {
  const std::vector<T>* target;
  const std::vector<T>* a;
  const std::vector<T>* b;
  std::vector<T>* grad_a;
  std::vector<T>* grad_b;
};

template <class T>
T evaluate(std::span<const Term<T>> terms, bool want_grads) {
  T total = 0;
  for (const auto& t : terms) {
    const std::size_t d = t.target->size();
    if (t.a->size() != d || t.b->size() != d) throw DimensionError("loss: representation length mismatch");
    T sum = 0;
    for (std::size_t i = 0; i < d; ++i) {
      const T r = ((*t.a)[i] + (*t.b)[i]) / T(2);
      const T diff = r - (*t.target)[i];
      sum += diff * diff;
      if (want_grads) {
        // d/da (1/d)(r − y)² with r = (a+b)/2  →  (r − y)/d
        const T g = diff / static_cast<T>(d);
        (*t.grad_a)[i] += g;
        (*t.grad_b)[i] += g;
      }
    }
    total += sum / static_cast<T>(d);
  }
  return total;
}

template <class T>
std::vector<T>* slot(TripleGradients<T>* g, DistilledPair<T> TripleGradients<T>::*sample,
                     std::vector<T> DistilledPair<T>::*part) {
  return g ? &((g->*sample).*part) : nullptr;
}

template <class T>
void check_mode(const TripleRepresentations<T>& reps, Mode expected, const char* fn) {
  if (reps.mode != expected) {
    throw ConfigError(std::string(fn) + ": called on a " + std::string(to_string(reps.mode)) + " triple");
  }
}

template <class T>
std::vector<Term<T>> cross_terms(const TripleRepresentations<T>& r, TripleGradients<T>* g) {
  using P = DistilledPair<T>;
  using G = TripleGradients<T>;
  const auto& h = r.original.distilled;
  const auto& p = r.positive.distilled;
  const auto& n = r.negative.distilled;
  auto hm = slot(g, &G::original, &P::meaning);
  auto hc = slot(g, &G::original, &P::context);
  auto pm = slot(g, &G::positive, &P::meaning);
  auto pc = slot(g, &G::positive, &P::context);
  auto nm = slot(g, &G::negative, &P::meaning);
  auto nc = slot(g, &G::negative, &P::context);

  std::vector<Term<T>> terms;
  terms.push_back({&r.positive.target, &h.meaning, &p.context, hm, pc});
  terms.push_back({&r.original.target, &p.meaning, &h.context, pm, hc});
  if (r.use_negatives) {
    if (r.mode == Mode::monolingual) {
      terms.push_back({&r.negative.target, &n.meaning, &h.context, nm, hc});
      terms.push_back({&r.original.target, &h.meaning, &n.context, hm, nc});
    } else {
      terms.push_back({&r.positive.target, &h.meaning, &n.context, hm, nc});
      terms.push_back({&r.negative.target, &n.meaning, &p.context, nm, pc});
    }
  }
  return terms;
}

}  // namespace

template <class T>
TripleGradients<T> TripleGradients<T>::zeros(std::size_t d) {
  TripleGradients g;
  for (auto* p : {&g.original, &g.positive, &g.negative}) {
    p->meaning.assign(d, T(0));
    p->context.assign(d, T(0));
  }
  return g;
}

template <class T>
T recon_loss(std::span<const T> target, std::span<const T> reconstructed) {
  if (target.size() != reconstructed.size()) throw DimensionError("recon_loss: length mismatch");
  if (target.empty()) return T(0);
  T sum = 0;
  for (std::size_t i = 0; i < target.size(); ++i) {
    const T diff = target[i] - reconstructed[i];
    sum += diff * diff;
  }
  return sum / static_cast<T>(target.size());
}

template <class T>
T cross_loss_mono(const TripleRepresentations<T>& reps, TripleGradients<T>* grads) {
  check_mode(reps, Mode::monolingual, "cross_loss_mono");
  if (!reps.use_negatives) throw ConfigError("cross_loss_mono: needs use_negatives=true; use total_loss for the ablation");
  auto terms = cross_terms(reps, grads);
  return evaluate<T>(terms, grads != nullptr);
}

template <class T>
T cross_loss_xl(const TripleRepresentations<T>& reps, TripleGradients<T>* grads) {
  check_mode(reps, Mode::crosslingual, "cross_loss_xl");
  if (!reps.use_negatives) throw ConfigError("cross_loss_xl: needs use_negatives=true; use total_loss for the ablation");
  auto terms = cross_terms(reps, grads);
  return evaluate<T>(terms, grads != nullptr);
}

template <class T>
LossBreakdown<T> total_loss(const TripleRepresentations<T>& r, TripleGradients<T>* g) {
  using P = DistilledPair<T>;
  using G = TripleGradients<T>;
  std::vector<Term<T>> recon;
  recon.push_back({&r.original.target, &r.original.distilled.meaning, &r.original.distilled.context,
                   slot(g, &G::original, &P::meaning), slot(g, &G::original, &P::context)});
  recon.push_back({&r.positive.target, &r.positive.distilled.meaning, &r.positive.distilled.context,
                   slot(g, &G::positive, &P::meaning), slot(g, &G::positive, &P::context)});
  if (r.use_negatives) {
    recon.push_back({&r.negative.target, &r.negative.distilled.meaning, &r.negative.distilled.context,
                     slot(g, &G::negative, &P::meaning), slot(g, &G::negative, &P::context)});
  }
  LossBreakdown<T> out;
  out.reconstruction = evaluate<T>(recon, g != nullptr);
  auto cross = cross_terms(r, g);
  out.cross = evaluate<T>(cross, g != nullptr);
  return out;
}

#define WIC_INSTANTIATE_LOSSES(T)                                                           \
  template struct TripleGradients<T>;                                                       \
  template T recon_loss(std::span<const T>, std::span<const T>);                            \
  template T cross_loss_mono(const TripleRepresentations<T>&, TripleGradients<T>*);          \
  template T cross_loss_xl(const TripleRepresentations<T>&, TripleGradients<T>*);            \
  template LossBreakdown<T> total_loss(const TripleRepresentations<T>&, TripleGradients<T>*);

WIC_INSTANTIATE_LOSSES(float)
WIC_INSTANTIATE_LOSSES(double)

#undef WIC_INSTANTIATE_LOSSES

}  // namespace wic::objective

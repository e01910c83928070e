#include "ealgan/training.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numeric>
#include <optional>
#include <sstream>

#include "ealgan/format.hpp"
#include "ealgan/metrics.hpp"
#include "ealgan/optim.hpp"

namespace ealgan {

std::string to_string(Ablation a) {
  switch (a) {
    case Ablation::none: return "none";
    case Ablation::no_embedding: return "no_embedding";
    case Ablation::single_disc: return "single_disc";
    case Ablation::plain_loss: return "plain_loss";
    case Ablation::random_sampling: return "random_sampling";
  }
  return "none";
}

Ablation parse_ablation(const std::string& tag) {
  for (auto a : kAllAblations) {
    if (to_string(a) == tag) return a;
  }
  throw std::invalid_argument("unknown ablation '" + tag +
                              "' (none, no_embedding, single_disc, plain_loss, random_sampling)");
}

FakeRealRatio FakeRealRatio::of(double fake, double real) {
  if (!(fake >= 0.0) || !(real >= 0.0) || !std::isfinite(fake) || !std::isfinite(real) ||
      (fake == 0.0 && real == 0.0)) {
    throw std::invalid_argument("fake:real ratio needs non-negative parts, not both zero");
  }
  FakeRealRatio r;
  r.mode = Mode::ratio;
  r.fake = fake;
  r.real = real;
  return r;
}

namespace {

double parse_ratio_part(const std::string& s, const std::string& whole) {
  double v = 0.0;
  const char* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (s.empty() || ec != std::errc() || ptr != end) {
    throw std::invalid_argument("malformed fake:real ratio '" + whole + "'");
  }
  return v;
}

}  // namespace

FakeRealRatio FakeRealRatio::parse(const std::string& text) {
  if (text == "batch") return whole_batch();
  const auto colon = text.find(':');
  if (colon == std::string::npos) throw std::invalid_argument("malformed fake:real ratio '" + text + "'");
  return of(parse_ratio_part(text.substr(0, colon), text), parse_ratio_part(text.substr(colon + 1), text));
}

std::string FakeRealRatio::to_string() const {
  if (mode == Mode::batch) return "batch";
  return format_double(fake) + ":" + format_double(real);
}

bool FakeRealRatio::aux_uses_real() const { return mode == Mode::batch || real > 0.0; }

std::size_t FakeRealRatio::aux_fake_count(std::size_t n_real, std::size_t fake_batch) const {
  if (mode == Mode::batch) return fake_batch;
  if (fake == 0.0) return 0;
  if (real == 0.0) return n_real;
  return static_cast<std::size_t>(std::llround(fake / real * static_cast<double>(n_real)));
}

void TrainConfig::validate() const {
  auto fail = [](const std::string& what) { throw std::invalid_argument("TrainConfig: " + what); };
  if (m < 1) fail("m must be >= 1");
  if (epochs < 1) fail("epochs must be >= 1");
  if (batch_size < 1) fail("batch_size must be >= 1");
  if (!(rho > 0.0 && rho <= 1.0)) fail("rho must be in (0, 1]");
  if (!(gen_lr > 0.0) || !std::isfinite(gen_lr)) fail("gen_lr must be positive");
  if (!(disc_lr_lo > 0.0) || !(disc_lr_hi >= disc_lr_lo) || !std::isfinite(disc_lr_hi)) {
    fail("disc_lr range must satisfy 0 < lo <= hi");
  }
  if (generator_depth < 3 || generator_depth > 5) fail("generator_depth must be in 3..5");
}

ComponentSet apply_ablation(const TrainConfig& cfg) {
  ComponentSet c;
  c.m = cfg.m;
  switch (cfg.ablation) {
    case Ablation::none: break;
    case Ablation::no_embedding: c.projection = false; break;
    case Ablation::single_disc: c.m = 1; break;
    case Ablation::plain_loss: c.plain_loss = true; break;
    case Ablation::random_sampling: c.random_sampling = true; break;
  }
  return c;
}

std::vector<double> TrainHistory::scores() const {
  std::vector<double> s;
  s.reserve(epochs.size());
  for (const auto& e : epochs) s.push_back(e.score);
  return s;
}

std::string TrainHistory::to_csv() const {
  std::string out = "epoch,iter,gen_loss,disc_loss,train_auc,train_gmean,labels_revealed\n";
  for (std::size_t i = 0; i < iterations.size(); ++i) {
    const auto& r = iterations[i];
    const bool epoch_end = i + 1 == iterations.size() || iterations[i + 1].epoch != r.epoch;
    out += std::to_string(r.epoch) + "," + std::to_string(r.iter) + "," + format_double(r.gen_loss) +
           "," + format_double(r.disc_loss) + ",";
    if (epoch_end && r.epoch >= 1 && r.epoch <= epochs.size()) {
      const auto& e = epochs[r.epoch - 1];
      out += format_double(e.train_auc) + "," + format_double(e.train_gmean);
    } else {
      out += ",";
    }
    out += "," + std::to_string(r.labels_revealed) + "\n";
  }
  return out;
}

std::size_t select_checkpoint(std::span<const double> scores) {
  if (scores.empty()) throw std::invalid_argument("select_checkpoint: no snapshots");
  std::size_t best = 0;
  for (std::size_t i = 1; i < scores.size(); ++i) {
    if (scores[i] > scores[best]) best = i;
  }
  return best;
}

EnsembleModel select_checkpoint(std::span<const double> scores,
                                const std::vector<EnsembleModel>& snapshots) {
  if (scores.size() != snapshots.size()) {
    throw std::invalid_argument("select_checkpoint: " + std::to_string(scores.size()) + " scores for " +
                                std::to_string(snapshots.size()) + " snapshots");
  }
  return snapshots[select_checkpoint(scores)];
}

namespace {

bool all_finite(const std::vector<Matrix>& grads) {
  return std::all_of(grads.begin(), grads.end(), [](const Matrix& g) { return g.all_finite(); });
}

[[noreturn]] void numeric_abort(const std::string& what, std::size_t epoch, std::size_t iter,
                                const EnsembleModel& model, double value) {
  std::ostringstream os;
  os << "non-finite " << what << " at epoch " << epoch << ", iteration " << iter
     << " (value " << format_double(value) << "); generator params finite: ";
  bool gen_ok = true;
  for (const Matrix* p : model.generator.parameters()) gen_ok = gen_ok && p->all_finite();
  os << (gen_ok ? "yes" : "no") << "; discriminator params finite:";
  for (std::size_t k = 0; k < model.size(); ++k) {
    bool ok = true;
    for (const Matrix* p : model.discriminators[k].parameters()) ok = ok && p->all_finite();
    os << " D" << k + 1 << "=" << (ok ? "yes" : "no");
  }
  throw NumericError(os.str());
}

// Rows [0, count) of the fake batch, topped up with fresh balanced samples
// from the current generator when count exceeds the batch.
void fill_aux_fakes(DiscriminatorBatch& db, const FakeBatch& fake, std::size_t count,
                    const GeneratorNet& gen, SeededRng& rng) {
  const std::size_t from_batch = std::min(count, fake.samples.rows());
  std::vector<std::size_t> rows(from_batch);
  std::iota(rows.begin(), rows.end(), std::size_t{0});
  db.aux_fake_x = gather_rows(fake.samples, rows);
  db.aux_fake_y.assign(fake.labels.begin(), fake.labels.begin() + static_cast<std::ptrdiff_t>(from_batch));
  if (count > from_batch) {
    const auto extra = sample_fake_batch(gen, count - from_batch, rng, true);
    db.aux_fake_x = vstack(db.aux_fake_x, extra.samples);
    db.aux_fake_y.insert(db.aux_fake_y.end(), extra.labels.begin(), extra.labels.end());
  }
}

}  // namespace

TrainResult train(const Dataset& data, const TrainConfig& cfg, LabelOracle& oracle,
                  const IterationObserver& observer) {
  cfg.validate();
  data.validate();
  if (oracle.size() != data.size()) {
    throw std::invalid_argument("train: oracle covers " + std::to_string(oracle.size()) +
                                " samples, dataset has " + std::to_string(data.size()));
  }
  const ComponentSet comp = apply_ablation(cfg);
  const std::size_t n = data.size();
  const std::size_t bs = cfg.batch_size;

  SeededRng master(cfg.seed);
  EnsembleModel model = build_ensemble(data.dim(), comp.m, master, cfg.disc_lr_lo, cfg.disc_lr_hi,
                                       {cfg.generator_depth, comp.projection});
  SeededRng order_rng = master.fork();
  SeededRng noise_rng = master.fork();
  SeededRng select_rng = master.fork();

  AdamState gen_state;
  std::vector<AdamState> disc_states(model.size());

  const std::size_t iters = std::max<std::size_t>(1, n / bs);
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), std::size_t{0});

  TrainHistory history;
  std::optional<EnsembleModel> best;
  double best_score = 0.0;

  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    order_rng.shuffle(std::span<std::size_t>(perm));
    for (std::size_t it = 0; it < iters; ++it) {
      IterationTrace trace;
      trace.epoch = epoch;
      trace.iter = it + 1;
      const std::size_t begin = it * bs;
      const std::size_t end = std::min(n, begin + bs);
      trace.batch_indices.assign(perm.begin() + static_cast<std::ptrdiff_t>(begin),
                                 perm.begin() + static_cast<std::ptrdiff_t>(end));

      // (a) fake batch from the current generator
      GeneratorTape tape;
      const FakeBatch fake = sample_fake_batch(model.generator, bs, noise_rng, true, &tape);

      // (b) generator step against every discriminator
      trace.generator_contexts = generator_contexts(model, fake.samples, fake.labels, comp.plain_loss);
      const GeneratorObjective gobj =
          gen_total_loss(model, fake.samples, fake.labels, trace.generator_contexts);
      if (!std::isfinite(gobj.value)) numeric_abort("generator loss", epoch, it + 1, model, gobj.value);
      const auto ggrads = generator_backward(model.generator, tape, gobj.grad_fake);
      if (!all_finite(ggrads)) numeric_abort("generator gradient", epoch, it + 1, model, gobj.value);
      adam_update(model.generator.parameters(), ggrads, gen_state, cfg.gen_lr);
      trace.gen_loss = gobj.value;

      // (c) pick and label reals
      const Matrix real_x = gather_rows(data.features, trace.batch_indices);
      std::vector<std::size_t> local;
      if (comp.random_sampling) {
        local = random_select(real_x.rows(), cfg.rho, select_rng);
      } else {
        local = active_select(ensemble_score(model, real_x), cfg.rho);
      }
      trace.selected.reserve(local.size());
      for (auto i : local) trace.selected.push_back(trace.batch_indices[i]);
      trace.revealed = oracle.reveal(trace.selected);
      history.samples_visited += real_x.rows();

      // (d) sequential discriminator updates
      DiscriminatorBatch db;
      db.real_x = gather_rows(real_x, local);
      db.real_y = trace.revealed;
      db.fake_x = fake.samples;
      db.fake_y = fake.labels;
      db.aux_uses_real = cfg.fake_real.aux_uses_real();
      fill_aux_fakes(db, fake, cfg.fake_real.aux_fake_count(local.size(), fake.samples.rows()),
                     model.generator, noise_rng);
      trace.aux_real_count = db.aux_uses_real ? db.real_x.rows() : 0;
      trace.aux_fake_count = db.aux_fake_x.rows();

      ContextAccumulator acc(db);
      double disc_sum = 0.0;
      for (std::size_t k = 0; k < model.size(); ++k) {
        auto& disc = model.discriminators[k];
        ModulatingContext ctx = comp.plain_loss ? ModulatingContext{} : acc.context();
        DiscriminatorObjective dobj = discriminator_objective(disc, db, ctx);
        if (!std::isfinite(dobj.total)) {
          numeric_abort("loss of discriminator " + std::to_string(k + 1), epoch, it + 1, model, dobj.total);
        }
        if (!all_finite(dobj.grads)) {
          numeric_abort("gradient of discriminator " + std::to_string(k + 1), epoch, it + 1, model,
                        dobj.total);
        }
        adam_update(disc.parameters(), dobj.grads, disc_states[k], disc.learning_rate());
        acc.add(cfg.frozen_context ? dobj.predictions : predict_batch(disc, db));
        disc_sum += dobj.total;
        trace.disc_losses.push_back(dobj.total);
        trace.discriminator_contexts.push_back(std::move(ctx));
      }

      IterationRecord rec;
      rec.epoch = epoch;
      rec.iter = it + 1;
      rec.gen_loss = gobj.value;
      rec.disc_loss = disc_sum / static_cast<double>(model.size());
      rec.labels_revealed = oracle.labels_revealed();
      history.iterations.push_back(rec);
      if (observer) observer(trace, model);
    }

    const MetricsReport report = evaluate(model, data);
    EpochRecord er;
    er.epoch = epoch;
    er.train_auc = report.auc;
    er.train_gmean = report.gmean;
    er.score = report.selection_score();
    history.epochs.push_back(er);
    if (!best || er.score > best_score) {
      best = model;
      best_score = er.score;
      history.best_epoch = epoch;
    }
  }

  history.labels_revealed = oracle.labels_revealed();
  history.label_requests = oracle.requests();
  return TrainResult{std::move(*best), std::move(history)};
}

TrainResult train(const Dataset& data, const TrainConfig& cfg) {
  LabelOracle oracle(data.labels);
  return train(data, cfg, oracle);
}

}  // namespace ealgan

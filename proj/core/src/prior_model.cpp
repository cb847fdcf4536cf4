#include "anatprior/prior/prior_model.hpp"

#include "anatprior/autodiff/ops.hpp"
#include "anatprior/errors.hpp"

namespace anatprior {

PriorModel make_prior_model(const ArchitectureConfig& arch, double prob_floor,
                            LocationPrior location, Rng& rng) {
  arch.validate();
  if (location.probs.shape() != Shape{arch.height, arch.width, arch.channels}) {
    throw DimensionError("location prior shape does not match the architecture");
  }
  PriorModel m;
  m.arch = arch;
  m.prob_floor = prob_floor;
  m.encoder = ConvEncoder(arch, rng);
  m.decoder = ConvDecoder(arch, rng);
  m.location = std::move(location);
  return m;
}

ad::Var segmentation_head(ad::Var logits, const Grid& log_location,
                          double prob_floor) {
  ad::Tape& t = logits.tape();
  ad::Var combined = ad::add(ad::log_sigmoid(logits), t.constant(log_location));
  return ad::floor_probabilities(ad::softmax_channels(combined), prob_floor);
}

ad::Var decode_probabilities(ad::Var z, ConvDecoder& decoder,
                             const LocationPrior& loc, double prob_floor) {
  return segmentation_head(decoder.forward(z.tape(), z), loc.log_probs(), prob_floor);
}

ad::Var decode_probabilities(ad::Var z, const ConvDecoder& decoder,
                             const LocationPrior& loc, double prob_floor) {
  return segmentation_head(decoder.forward(z.tape(), z), loc.log_probs(), prob_floor);
}

namespace {

void check_map(const SegmentationMap& s, const ArchitectureConfig& arch) {
  if (s.height() != arch.height || s.width() != arch.width ||
      s.num_labels() != arch.channels) {
    throw DimensionError("segmentation map does not match the prior's H x W x L");
  }
}

GaussianPosterior to_posterior(const ConvEncoder::Output& out) {
  const auto m = out.mean.value().values();
  const auto v = out.var.value().values();
  return {std::vector<double>(m.begin(), m.end()),
          std::vector<double>(v.begin(), v.end())};
}

}  // namespace

GaussianPosterior encode_segmentation(const SegmentationMap& s,
                                      const PriorModel& model) {
  check_map(s, model.arch);
  ad::Tape tape;
  const ConvEncoder& enc = model.encoder;
  return to_posterior(enc.forward(tape, tape.constant(s.one_hot())));
}

Grid decode_latent(const LatentCode& z, const ConvDecoder& decoder,
                   const LocationPrior& loc, double prob_floor) {
  ad::Tape tape;
  ad::Var zv = tape.constant(Grid({z.z.size()}, z.z));
  return decode_probabilities(zv, decoder, loc, prob_floor).value();
}

PriorLossTerms prior_loss(const SegmentationMap& s, const LatentCode& z,
                          const PriorModel& model) {
  PriorLossTerms terms;
  terms.kl = kl_standard_normal(encode_segmentation(s, model));
  ad::Tape tape;
  const ConvDecoder& dec = model.decoder;
  ad::Var zv = tape.constant(Grid({z.z.size()}, z.z));
  ad::Var f = decode_probabilities(zv, dec, model.location, model.prob_floor);
  terms.cross_entropy =
      ad::categorical_cross_entropy(f, s.one_hot()).value()[0];
  terms.total = terms.kl + terms.cross_entropy;
  return terms;
}

ObjectiveTerms prior_objective(ad::Tape& tape, const SegmentationMap& s,
                               PriorModel& model, const Grid& eta) {
  check_map(s, model.arch);
  const Grid target = s.one_hot();
  auto post = model.encoder.forward(tape, tape.constant(target));
  ad::Var z = ad::reparameterize(post.mean, post.var, eta);
  ad::Var f = decode_probabilities(z, model.decoder, model.location, model.prob_floor);
  ad::Var kl = ad::kl_standard_normal(post.mean, post.var);
  ad::Var ce = ad::categorical_cross_entropy(f, target);
  return {kl, ce, ad::add(kl, ce)};
}

TrainingTrace fit_prior(PriorModel& model, std::span<const SegmentationMap> segs,
                        const TrainingConfig& cfg, Rng& rng) {
  if (segs.empty()) throw ContractError("prior training needs at least one map");
  for (const SegmentationMap& s : segs) check_map(s, model.arch);

  std::vector<ad::Parameter*> params = model.encoder.parameters();
  for (ad::Parameter* p : model.decoder.parameters()) params.push_back(p);
  const std::size_t d = model.arch.latent_dim;
  return run_epochs(segs.size(), cfg, params, "cross_entropy", rng,
                    [&](std::size_t i, double inv_batch) {
                      ad::Tape tape;
                      const Grid eta({d}, draw_standard_normal(d, rng));
                      const ObjectiveTerms obj = prior_objective(tape, segs[i], model, eta);
                      const double kl = obj.kl.value()[0], ce = obj.data.value()[0];
                      check_finite_terms("train_prior", kl + ce, kl, ce, "cross_entropy");
                      tape.backward(ad::scale(obj.total, inv_batch));
                      return std::pair{kl, ce};
                    });
}

PriorTrainingResult train_prior(std::span<const SegmentationMap> segs,
                                const ArchitectureConfig& arch, double prob_floor,
                                const TrainingConfig& cfg, Rng& rng) {
  if (segs.empty()) throw ContractError("prior training needs at least one map");
  PriorTrainingResult result{
      make_prior_model(arch, prob_floor, compute_location_prior(segs, prob_floor), rng),
      {}};
  result.trace = fit_prior(result.model, segs, cfg, rng);
  return result;
}

}  // namespace anatprior

namespace anatprior {

void put_location_prior(Checkpoint& ckpt, const std::string& prefix,
                        const LocationPrior& loc) {
  ckpt.config[prefix + "floor"] = format_double(loc.floor);
  ckpt.tensors.emplace_back(prefix + "probs", loc.probs);
}

LocationPrior get_location_prior(const Checkpoint& ckpt, const std::string& prefix) {
  LocationPrior loc{ckpt.tensor(prefix + "probs"),
                    parse_double(ckpt.value(prefix + "floor"), prefix + "floor")};
  try {
    loc.validate();
  } catch (const Error& e) {
    throw CorruptFileError(std::string("checkpoint location prior: ") + e.what());
  }
  return loc;
}

Checkpoint prior_to_checkpoint(const PriorModel& model) {
  Checkpoint ckpt;
  ckpt.kind = "prior";
  put_architecture(ckpt, "arch.", model.arch);
  ckpt.config["prob_floor"] = format_double(model.prob_floor);
  put_parameters(ckpt, "encoder/", model.encoder.named_parameters());
  put_parameters(ckpt, "decoder/", model.decoder.named_parameters());
  put_location_prior(ckpt, "location.", model.location);
  return ckpt;
}

PriorModel prior_from_checkpoint(const Checkpoint& ckpt) {
  if (ckpt.kind != "prior") {
    throw CorruptFileError("expected a prior checkpoint, got '" + ckpt.kind + "'");
  }
  const ArchitectureConfig arch = get_architecture(ckpt, "arch.");
  Rng unused(0);
  PriorModel m = make_prior_model(
      arch, parse_double(ckpt.value("prob_floor"), "prob_floor"),
      get_location_prior(ckpt, "location."), unused);
  get_parameters(ckpt, "encoder/", m.encoder.named_parameters());
  get_parameters(ckpt, "decoder/", m.decoder.named_parameters());
  return m;
}

void save_prior(const std::filesystem::path& path, const PriorModel& model) {
  save_checkpoint(path, prior_to_checkpoint(model));
}

PriorModel load_prior(const std::filesystem::path& path) {
  return prior_from_checkpoint(load_checkpoint(path));
}

}  // namespace anatprior

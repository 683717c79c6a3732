#include "latentforge/attack.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace latentforge {

ImageGrid fgsm(const ScoreEval& score_eval, const ImageGrid& image,
               double epsilon) {
  if (epsilon < 0.0) throw std::invalid_argument("fgsm: epsilon must be >= 0");
  auto [score, grad] = score_eval(image);
  (void)score;
  ImageGrid out = image;
  auto po = out.pixels();
  auto pg = grad.pixels();
  for (std::size_t i = 0; i < po.size(); ++i) {
    if (!std::isfinite(pg[i]))
      throw std::runtime_error("fgsm: non-finite gradient");
    double s = pg[i] > 0.0 ? 1.0 : (pg[i] < 0.0 ? -1.0 : 0.0);
    po[i] = std::clamp(po[i] + epsilon * s, 0.0, 1.0);
  }
  return out;
}

AttackGains attack_gain_report(const Scorer& scorer, const AugSpec& aug,
                               std::span<const double> embedding,
                               const ImageGrid& image, double epsilon) {
  AttackGains gains;

  ScoreEval plain_eval = [&](const ImageGrid& img) {
    return std::make_pair(scorer.score(embedding, img),
                          scorer.image_vjp(embedding, img, 1.0));
  };
  ImageGrid attacked_plain = fgsm(plain_eval, image, epsilon);
  gains.plain =
      scorer.score(embedding, attacked_plain) - scorer.score(embedding, image);

  ScoreEval aug_eval = [&](const ImageGrid& img) {
    AugScore s = augmented_score(scorer, embedding, img, aug);
    return std::make_pair(s.score, std::move(s.gradient));
  };
  ImageGrid attacked_aug = fgsm(aug_eval, image, epsilon);
  gains.augmented = augmented_score(scorer, embedding, attacked_aug, aug).score -
                    augmented_score(scorer, embedding, image, aug).score;
  return gains;
}

}  // namespace latentforge

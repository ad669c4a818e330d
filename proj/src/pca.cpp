#include "embedgeom/pca.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>

#include "binary_io.hpp"
#include "embedgeom/error.hpp"
#include "embedgeom/random.hpp"
#include "embedgeom/report_io.hpp"

namespace embedgeom {

namespace {

using detail::get_le;
using detail::put_le;

constexpr std::string_view kEpcaMagic = "EPCA";
constexpr std::uint32_t kEpcaVersion = 1;
constexpr std::size_t kEpcaHeaderSize = 4 + 4 + 4 + 4 + 8 + 8;
constexpr std::size_t kCovarianceBlock = 512;

// Flip each column so its largest-magnitude entry is positive; first index wins ties.
void canonicalize_signs(Eigen::MatrixXd& basis) {
  for (Eigen::Index j = 0; j < basis.cols(); ++j) {
    Eigen::Index best = 0;
    double best_abs = -1.0;
    for (Eigen::Index i = 0; i < basis.rows(); ++i) {
      const double a = std::abs(basis(i, j));
      if (a > best_abs) {
        best_abs = a;
        best = i;
      }
    }
    if (basis(best, j) < 0.0) basis.col(j) = -basis.col(j);
  }
}

std::vector<float> to_float(const double* values, std::size_t count) {
  std::vector<float> out(count);
  for (std::size_t i = 0; i < count; ++i) out[i] = static_cast<float>(values[i]);
  return out;
}

}  // namespace

PcaModel::PcaModel(std::vector<float> mean, std::vector<float> basis, std::vector<double> spectrum,
                   std::uint64_t sample_size, std::uint64_t seed)
    : mean_(std::move(mean)),
      basis_(std::move(basis)),
      spectrum_(std::move(spectrum)),
      sample_size_(sample_size),
      seed_(seed) {
  if (mean_.empty()) throw InputError("PCA model has zero source dimension");
  if (spectrum_.empty()) throw InputError("PCA model has rank 0");
  if (spectrum_.size() > mean_.size()) throw InputError("PCA rank exceeds source dimension");
  if (basis_.size() != mean_.size() * spectrum_.size()) {
    throw InputError("PCA basis holds " + std::to_string(basis_.size()) + " values, expected " +
                     std::to_string(mean_.size() * spectrum_.size()));
  }
  for (std::size_t i = 0; i < spectrum_.size(); ++i) {
    if (!std::isfinite(spectrum_[i]) || spectrum_[i] <= 0.0) {
      throw InputError("PCA spectrum entry " + std::to_string(i) + " is not positive");
    }
    if (i > 0 && spectrum_[i] > spectrum_[i - 1]) {
      throw InputError("PCA spectrum is not non-increasing at component " + std::to_string(i));
    }
  }
  cumulative_.resize(spectrum_.size());
  double total = 0.0;
  for (double s : spectrum_) total += s;
  double prefix = 0.0;
  for (std::size_t i = 0; i < spectrum_.size(); ++i) {
    prefix += spectrum_[i];
    cumulative_[i] = prefix / total;
  }
}

PcaModel PcaModel::from_spectrum(std::vector<double> spectrum) {
  const std::size_t d = spectrum.size();
  if (d == 0) throw InputError("empty spectrum");
  const double lead = *std::max_element(spectrum.begin(), spectrum.end());
  if (!(lead > 0.0)) throw NumericalError("degenerate corpus: zero variance");
  std::sort(spectrum.begin(), spectrum.end(), std::greater<>());
  std::size_t rank = 0;
  while (rank < d && spectrum[rank] >= kRankTolerance * lead && spectrum[rank] > 0.0) ++rank;
  spectrum.resize(rank);
  std::vector<float> basis(d * rank, 0.0f);
  for (std::size_t j = 0; j < rank; ++j) basis[j * d + j] = 1.0f;
  return PcaModel(std::vector<float>(d, 0.0f), std::move(basis), std::move(spectrum), 0, 0);
}

std::vector<std::size_t> pca_sample_rows(std::size_t rows, std::uint64_t sample_size,
                                         std::uint64_t seed) {
  std::vector<std::size_t> picked;
  if (sample_size >= rows) {
    picked.resize(rows);
    for (std::size_t i = 0; i < rows; ++i) picked[i] = i;
    return picked;
  }
  Rng rng(keyed_seed(seed, "pca-sample"));
  for (std::uint64_t r : sample_without_replacement(rng, rows, sample_size)) {
    picked.push_back(static_cast<std::size_t>(r));
  }
  std::sort(picked.begin(), picked.end());
  return picked;
}

PcaModel fit_pca(const EmbeddingMatrix& items, std::uint64_t sample_size, std::uint64_t seed) {
  if (sample_size < 2) throw InputError("sample size must be >= 2, got " + std::to_string(sample_size));
  if (items.rows() < 2) throw InputError("PCA needs at least 2 item rows");
  const auto rows = pca_sample_rows(items.rows(), sample_size, seed);
  const auto n = static_cast<Eigen::Index>(rows.size());
  const auto d = static_cast<Eigen::Index>(items.dim());

  {
    const auto first = items.row(rows.front());
    const bool all_same = std::all_of(rows.begin(), rows.end(), [&](std::size_t r) {
      return std::memcmp(items.row(r).data(), first.data(), first.size_bytes()) == 0;
    });
    if (all_same) throw NumericalError("degenerate corpus: zero variance");
  }

  Eigen::VectorXd mean = Eigen::VectorXd::Zero(d);
  for (std::size_t r : rows) {
    mean += Eigen::Map<const Eigen::VectorXf>(items.row(r).data(), d).cast<double>();
  }
  mean /= static_cast<double>(n);

  Eigen::VectorXd eigenvalues;
  Eigen::MatrixXd eigenvectors;
  if (n > d) {
    // Covariance route: accumulate X^T X over row blocks in f64.
    Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(d, d);
    Eigen::MatrixXd block(d, static_cast<Eigen::Index>(kCovarianceBlock));
    for (Eigen::Index start = 0; start < n; start += kCovarianceBlock) {
      const Eigen::Index len = std::min<Eigen::Index>(kCovarianceBlock, n - start);
      for (Eigen::Index b = 0; b < len; ++b) {
        block.col(b) =
            Eigen::Map<const Eigen::VectorXf>(items.row(rows[start + b]).data(), d).cast<double>() -
            mean;
      }
      cov.selfadjointView<Eigen::Lower>().rankUpdate(block.leftCols(len));
    }
    cov = cov.selfadjointView<Eigen::Lower>();
    cov /= static_cast<double>(n - 1);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
    if (solver.info() != Eigen::Success) throw NumericalError("covariance eigensolver failed");
    eigenvalues = solver.eigenvalues().reverse();
    eigenvectors = solver.eigenvectors().rowwise().reverse();
  } else {
    // Thin SVD of the centered sample.
    Eigen::MatrixXd centered(n, d);
    for (Eigen::Index i = 0; i < n; ++i) {
      centered.row(i) =
          (Eigen::Map<const Eigen::VectorXf>(items.row(rows[i]).data(), d).cast<double>() - mean)
              .transpose();
    }
    Eigen::BDCSVD<Eigen::MatrixXd> svd(centered, Eigen::ComputeThinV);
    eigenvalues = svd.singularValues().array().square() / static_cast<double>(n - 1);
    eigenvectors = svd.matrixV();
  }

  const double lead = eigenvalues.size() > 0 ? eigenvalues(0) : 0.0;
  if (!(lead > 0.0) || !std::isfinite(lead)) throw NumericalError("degenerate corpus: zero variance");
  Eigen::Index rank = 0;
  while (rank < eigenvalues.size() && eigenvalues(rank) >= kRankTolerance * lead) ++rank;

  Eigen::MatrixXd basis = eigenvectors.leftCols(rank);
  canonicalize_signs(basis);

  std::vector<double> spectrum(eigenvalues.data(), eigenvalues.data() + rank);
  return PcaModel(to_float(mean.data(), static_cast<std::size_t>(d)),
                  to_float(basis.data(), static_cast<std::size_t>(basis.size())),
                  std::move(spectrum), static_cast<std::uint64_t>(n), seed);
}

double explained_variance_ratio(const PcaModel& model, std::size_t k) {
  if (k < 1 || k > model.rank()) {
    throw InputError("component count " + std::to_string(k) + " outside [1, " +
                     std::to_string(model.rank()) + "]");
  }
  return model.cumulative_ratio()[k - 1];
}

std::size_t effective_dimension(const PcaModel& model, double epsilon) {
  if (!(epsilon > 0.0 && epsilon <= 1.0)) {
    throw InputError("epsilon must lie in (0, 1], got " + std::to_string(epsilon));
  }
  if (epsilon == 1.0) return model.rank();
  const auto ratios = model.cumulative_ratio();
  for (std::size_t k = 1; k <= ratios.size(); ++k) {
    if (ratios[k - 1] >= epsilon) return k;
  }
  return model.rank();
}

EmbeddingMatrix project(const PcaModel& model, const EmbeddingMatrix& vectors, std::size_t k) {
  if (vectors.dim() != model.source_dim()) {
    throw InputError("dimension mismatch: vectors have d=" + std::to_string(vectors.dim()) +
                     ", PCA model expects d=" + std::to_string(model.source_dim()));
  }
  if (k < 1 || k > model.rank()) {
    throw InputError("component count " + std::to_string(k) + " outside [1, " +
                     std::to_string(model.rank()) + "]");
  }
  const auto d = static_cast<Eigen::Index>(model.source_dim());
  const auto kk = static_cast<Eigen::Index>(k);
  const Eigen::MatrixXd basis =
      Eigen::Map<const Eigen::MatrixXf>(model.basis().data(), d, kk).cast<double>();
  const Eigen::RowVectorXd mean =
      Eigen::Map<const Eigen::RowVectorXf>(model.mean().data(), d).cast<double>();

  const auto n = static_cast<Eigen::Index>(vectors.rows());
  using RowMajorF = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  using RowMajorD = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  const Eigen::Map<const RowMajorF> input(vectors.data().data(), n, d);
  std::vector<float> out(static_cast<std::size_t>(n * kk));
  Eigen::Map<RowMajorF> output(out.data(), n, kk);
  constexpr Eigen::Index block = 1024;
  for (Eigen::Index start = 0; start < n; start += block) {
    const Eigen::Index len = std::min(block, n - start);
    RowMajorD centered = input.middleRows(start, len).cast<double>();
    centered.rowwise() -= mean;
    output.middleRows(start, len) = (centered * basis).cast<float>();
  }
  return EmbeddingMatrix(vectors.ids(), std::move(out), k, vectors.kind());
}

EmbeddingMatrix center(std::span<const float> mean, const EmbeddingMatrix& vectors) {
  if (vectors.dim() != mean.size()) {
    throw InputError("dimension mismatch: vectors have d=" + std::to_string(vectors.dim()) +
                     ", mean has d=" + std::to_string(mean.size()));
  }
  std::vector<float> out(vectors.data().begin(), vectors.data().end());
  const std::size_t d = mean.size();
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = static_cast<float>(static_cast<double>(out[i]) - static_cast<double>(mean[i % d]));
  }
  return EmbeddingMatrix(vectors.ids(), std::move(out), d, vectors.kind());
}

EmbeddingMatrix center(const PcaModel& model, const EmbeddingMatrix& vectors) {
  return center(model.mean(), vectors);
}

std::vector<float> column_mean(const EmbeddingMatrix& matrix) {
  std::vector<double> sum(matrix.dim(), 0.0);
  for (std::size_t r = 0; r < matrix.rows(); ++r) {
    const auto row = matrix.row(r);
    for (std::size_t c = 0; c < row.size(); ++c) sum[c] += row[c];
  }
  for (double& s : sum) s /= static_cast<double>(matrix.rows());
  return to_float(sum.data(), sum.size());
}

std::string encode_epca(const PcaModel& model) {
  std::string out;
  out.append(kEpcaMagic);
  put_le<std::uint32_t>(out, kEpcaVersion);
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(model.source_dim()));
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(model.rank()));
  put_le<std::uint64_t>(out, model.sample_size());
  put_le<std::uint64_t>(out, model.seed());
  for (float v : model.mean()) put_le<std::uint32_t>(out, std::bit_cast<std::uint32_t>(v));
  for (double v : model.spectrum()) put_le<std::uint64_t>(out, std::bit_cast<std::uint64_t>(v));
  for (float v : model.basis()) put_le<std::uint32_t>(out, std::bit_cast<std::uint32_t>(v));
  return out;
}

PcaModel decode_epca(std::string_view bytes, std::string_view source) {
  const std::string where = std::string(source) + ": ";
  if (bytes.size() < kEpcaHeaderSize || bytes.substr(0, 4) != kEpcaMagic) {
    throw InputError(where + "malformed header (missing EPCA magic)");
  }
  const auto version = get_le<std::uint32_t>(bytes, 4);
  if (version != kEpcaVersion) {
    throw InputError(where + "unsupported EPCA version " + std::to_string(version));
  }
  const std::size_t d = get_le<std::uint32_t>(bytes, 8);
  const std::size_t r = get_le<std::uint32_t>(bytes, 12);
  const auto sample_size = get_le<std::uint64_t>(bytes, 16);
  const auto seed = get_le<std::uint64_t>(bytes, 24);
  const std::size_t expected = kEpcaHeaderSize + d * 4 + r * 8 + d * r * 4;
  if (bytes.size() != expected) {
    throw InputError(where + "EPCA size " + std::to_string(bytes.size()) + " bytes, expected " +
                     std::to_string(expected));
  }
  std::size_t offset = kEpcaHeaderSize;
  std::vector<float> mean(d);
  for (auto& v : mean) {
    v = std::bit_cast<float>(get_le<std::uint32_t>(bytes, offset));
    offset += 4;
  }
  std::vector<double> spectrum(r);
  for (auto& v : spectrum) {
    v = std::bit_cast<double>(get_le<std::uint64_t>(bytes, offset));
    offset += 8;
  }
  std::vector<float> basis(d * r);
  for (auto& v : basis) {
    v = std::bit_cast<float>(get_le<std::uint32_t>(bytes, offset));
    offset += 4;
  }
  try {
    return PcaModel(std::move(mean), std::move(basis), std::move(spectrum), sample_size, seed);
  } catch (const InputError& e) {
    throw InputError(where + e.what());
  }
}

void save_pca(const std::filesystem::path& path, const PcaModel& model) {
  write_file_atomic(path, encode_epca(model));
}

PcaModel load_pca(const std::filesystem::path& path) {
  return decode_epca(read_file(path), path.string());
}

}  // namespace embedgeom

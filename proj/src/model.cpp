#include "tdefl/model.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include "tdefl/errors.hpp"
#include "tdefl/rng.hpp"
#include "tdefl/version.hpp"

namespace tdefl {

namespace {

constexpr char kMagic[4] = {'S', 'P', 'K', 'T'};

// Seed-stream tags.
constexpr std::uint64_t kSpikeStream = 1;
constexpr std::uint64_t kNoiseStream = 2;

static_assert(std::endian::native == std::endian::little,
              "model file I/O assumes a little-endian host");

void write_u32(std::ofstream& out, std::uint32_t v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(v));
}

std::uint32_t read_u32(std::ifstream& in, const char* field) {
  std::uint32_t v = 0;
  in.read(reinterpret_cast<char*>(&v), sizeof(v));
  if (!in) throw FileFormatError(std::string("model file: truncated ") + field);
  return v;
}

// Factor A with A A^T = gram. Cholesky when positive definite; symmetric
// square root when semidefinite (allows targets on the PSD boundary).
Eigen::MatrixXd gram_factor(const Eigen::MatrixXd& gram, int mode) {
  Eigen::LLT<Eigen::MatrixXd> llt(gram);
  if (llt.info() == Eigen::Success) {
    return llt.matrixL();
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gram);
  const double min_eig = es.eigenvalues().minCoeff();
  if (min_eig < -1e-10) {
    throw std::invalid_argument(
        "generate_correlated_spikes: target Gram at mode " + std::to_string(mode) +
        " is not positive semidefinite (min eigenvalue " + std::to_string(min_eig) +
        ")");
  }
  const Eigen::VectorXd clipped = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * clipped.asDiagonal();
}

}  // namespace

std::vector<Eigen::MatrixXd> ModelParams::uniform_alpha(int r, int d, double alpha) {
  Eigen::MatrixXd g = Eigen::MatrixXd::Constant(r, r, alpha);
  g.diagonal().setOnes();
  return std::vector<Eigen::MatrixXd>(static_cast<std::size_t>(d), g);
}

int ModelParams::total_dim() const {
  int n = 0;
  for (int v : dims) n += v;
  return n;
}

void ModelParams::validate() const {
  if (r < 1) throw std::invalid_argument("ModelParams: rank must be >= 1");
  if (d < 3) throw std::invalid_argument("ModelParams: order must be >= 3");
  if (static_cast<int>(dims.size()) != d) {
    throw std::invalid_argument("ModelParams: dims length != order");
  }
  for (int n : dims) {
    if (n <= 0) throw std::invalid_argument("ModelParams: non-positive dimension");
  }
  if (betas.size() != r) throw std::invalid_argument("ModelParams: betas length != r");
  for (int i = 0; i < r; ++i) {
    if (betas[i] < 0.0) throw std::invalid_argument("ModelParams: negative beta");
  }
  if (static_cast<int>(alphas.size()) != d) {
    throw std::invalid_argument("ModelParams: alphas must hold one matrix per mode");
  }
  for (const auto& a : alphas) {
    if (a.rows() != r || a.cols() != r) {
      throw std::invalid_argument("ModelParams: alpha matrix is not r x r");
    }
    for (int i = 0; i < r; ++i) {
      if (std::abs(a(i, i) - 1.0) > 1e-14) {
        throw std::invalid_argument("ModelParams: alpha diagonal must be 1");
      }
      for (int j = 0; j < r; ++j) {
        if (a(i, j) < 0.0 || a(i, j) > 1.0) {
          throw std::invalid_argument("ModelParams: alpha entries must be in [0,1]");
        }
        if (std::abs(a(i, j) - a(j, i)) > 1e-14) {
          throw std::invalid_argument("ModelParams: alpha matrix must be symmetric");
        }
      }
    }
  }
}

SpikeSet generate_correlated_spikes(const ModelParams& params) {
  params.validate();
  const int r = params.r;
  SpikeSet spikes;
  spikes.weights = params.betas;
  spikes.components.assign(r, VectorTuple(params.d));
  spikes.realized_gram.assign(params.d, Eigen::MatrixXd::Zero(r, r));

  for (int l = 0; l < params.d; ++l) {
    const int n = params.dims[l];
    if (n < r) {
      throw std::invalid_argument("generate_correlated_spikes: dimension " +
                                  std::to_string(n) + " at mode " + std::to_string(l) +
                                  " cannot carry " + std::to_string(r) +
                                  " independent directions");
    }
    GaussianStream gauss(derive_seed(params.seed, kSpikeStream, l));
    Eigen::MatrixXd basis(n, r);
    for (int j = 0; j < r; ++j) {
      for (int p = 0; p < n; ++p) basis(p, j) = gauss.next();
    }
    // Two-pass modified Gram-Schmidt.
    for (int j = 0; j < r; ++j) {
      for (int pass = 0; pass < 2; ++pass) {
        for (int k = 0; k < j; ++k) {
          basis.col(j) -= basis.col(k).dot(basis.col(j)) * basis.col(k);
        }
      }
      const double norm = basis.col(j).norm();
      if (norm < 1e-8) {
        throw NumericalError("generate_correlated_spikes: degenerate random basis");
      }
      basis.col(j) /= norm;
    }
    const Eigen::MatrixXd factor = gram_factor(params.alphas[l], l);
    for (int i = 0; i < r; ++i) {
      Eigen::VectorXd x = basis * factor.row(i).transpose();
      x /= x.norm();
      spikes.components[i][l] = std::move(x);
    }
    for (int i = 0; i < r; ++i) {
      for (int j = 0; j < r; ++j) {
        spikes.realized_gram[l](i, j) =
            spikes.components[i][l].dot(spikes.components[j][l]);
      }
    }
  }
  return spikes;
}

DenseTensor sample_noise(const std::vector<int>& dims, std::uint64_t seed) {
  for (int n : dims) {
    if (n <= 0) throw std::invalid_argument("sample_noise: non-positive dimension");
  }
  DenseTensor t(dims);
  GaussianStream gauss(seed);
  double* data = t.data();
  for (std::size_t i = 0; i < t.size(); ++i) data[i] = gauss.next();
  return t;
}

DenseTensor assemble_model(const SpikeSet& spikes, const DenseTensor& noise) {
  const int r = static_cast<int>(spikes.components.size());
  if (spikes.weights.size() != r) {
    throw std::invalid_argument("assemble_model: weights/components mismatch");
  }
  int total = 0;
  for (int n : noise.shape()) total += n;
  DenseTensor t = noise;
  t *= 1.0 / std::sqrt(static_cast<double>(total));
  for (int i = 0; i < r; ++i) {
    for (int l = 0; l < noise.order(); ++l) {
      if (spikes.components[i][l].size() != noise.shape()[l]) {
        throw std::invalid_argument("assemble_model: spike " + std::to_string(i) +
                                    " has wrong length at mode " + std::to_string(l));
      }
    }
    t.add_scaled(1.0, outer_product(spikes.components[i], spikes.weights[i]));
  }
  return t;
}

GeneratedModel generate_model(const ModelParams& params) {
  GeneratedModel out;
  out.spikes = generate_correlated_spikes(params);
  const DenseTensor noise = sample_noise(params.dims, derive_seed(params.seed, kNoiseStream, 0));
  out.tensor = assemble_model(out.spikes, noise);
  return out;
}

void write_model(const std::string& path, const DenseTensor& t) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FileFormatError("write_model: cannot open " + path);
  out.write(kMagic, 4);
  write_u32(out, static_cast<std::uint32_t>(kModelFileVersion));
  write_u32(out, static_cast<std::uint32_t>(t.order()));
  for (int n : t.shape()) write_u32(out, static_cast<std::uint32_t>(n));
  out.write(reinterpret_cast<const char*>(t.data()),
            static_cast<std::streamsize>(t.size() * sizeof(double)));
  if (!out) throw FileFormatError("write_model: short write to " + path);
}

DenseTensor read_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FileFormatError("read_model: cannot open " + path);
  char magic[4] = {};
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kMagic, 4) != 0) {
    throw FileFormatError("read_model: bad magic in " + path +
                          " (field: magic, expected SPKT)");
  }
  const std::uint32_t version = read_u32(in, "version");
  if (version != static_cast<std::uint32_t>(kModelFileVersion)) {
    throw FileFormatError("read_model: unsupported version " +
                          std::to_string(version) + " (field: version)");
  }
  const std::uint32_t d = read_u32(in, "order");
  if (d < 2 || d > 16) {
    throw FileFormatError("read_model: implausible order " + std::to_string(d) +
                          " (field: order)");
  }
  std::vector<int> shape(d);
  std::size_t total = 1;
  for (std::uint32_t l = 0; l < d; ++l) {
    const std::uint32_t n = read_u32(in, "dims");
    if (n == 0 || n > (1u << 20)) {
      throw FileFormatError("read_model: bad dimension " + std::to_string(n) +
                            " (field: dims[" + std::to_string(l) + "])");
    }
    shape[l] = static_cast<int>(n);
    total *= n;
  }
  std::vector<double> data(total);
  in.read(reinterpret_cast<char*>(data.data()),
          static_cast<std::streamsize>(total * sizeof(double)));
  if (!in || static_cast<std::size_t>(in.gcount()) != total * sizeof(double)) {
    throw FileFormatError("read_model: truncated payload (field: data)");
  }
  return DenseTensor(std::move(shape), std::move(data));
}

}  // namespace tdefl

#pragma once
// Point sets in axis-aligned boxes, seeded sampling, and the covering
// functionals used by the interpolation experiments (fill and separation).

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace ks {

inline constexpr std::size_t kMaxDim = 4;

class Domain {
public:
    Domain(std::vector<double> lower, std::vector<double> upper);

    static Domain unit_cube(std::size_t d);

    std::size_t dim() const { return lower_.size(); }
    const std::vector<double>& lower() const { return lower_; }
    const std::vector<double>& upper() const { return upper_; }

    bool contains(std::span<const double> x) const;

    bool operator==(const Domain&) const = default;

private:
    std::vector<double> lower_;
    std::vector<double> upper_;
};

// Ordered sample; the order defines the empirical measure (1/n) sum delta_{x_i}.
class PointSet {
public:
    PointSet(Domain domain, std::vector<double> coords, std::string label = {});

    std::size_t size() const { return dim() == 0 ? 0 : coords_.size() / dim(); }
    bool empty() const { return coords_.empty(); }
    std::size_t dim() const { return domain_.dim(); }
    const Domain& domain() const { return domain_; }
    const std::string& label() const { return label_; }

    std::span<const double> operator[](std::size_t i) const {
        return {coords_.data() + i * dim(), dim()};
    }
    const std::vector<double>& coords() const { return coords_; }

    // Points [0, count) as a new set (nested prefixes of a sample).
    PointSet prefix(std::size_t count) const;
    PointSet subset(std::span<const std::size_t> indices) const;
    PointSet with_point(std::span<const double> x) const;

    bool operator==(const PointSet&) const = default;

private:
    Domain domain_;
    std::vector<double> coords_;
    std::string label_;
};

struct MixtureComponent {
    std::vector<double> center;
    double width = 0.1;  // isotropic standard deviation
    double weight = 1.0;
};

struct MeasureSpec {
    enum class Kind { Grid, UniformIid, GaussianMixture, Circle };

    Kind kind = Kind::UniformIid;
    std::vector<MixtureComponent> components;  // GaussianMixture only
    std::uint64_t seed = 0;

    std::string name() const;
};

struct SamplingLimits {
    std::size_t max_points = 1'000'000;
    std::size_t attempts_per_point = 1000;
};

PointSet gen_grid(const Domain& domain, std::size_t points_per_axis, const SamplingLimits& limits = {});

PointSet gen_sample(const MeasureSpec& spec, const Domain& domain, std::size_t n,
                    const SamplingLimits& limits = {});

struct FillDistance {
    double value = 0.0;
    double candidate_spacing = 0.0;  // 0 when exact
    bool exact = false;
};

inline constexpr std::size_t kDefaultFillResolution = 201;

// sup over the domain of the distance to the nearest sample point. Exact in
// d = 1; otherwise a max-min over a resolution^d candidate grid.
FillDistance fill_distance(const PointSet& x, std::size_t resolution = kDefaultFillResolution);

// Minimum pairwise distance; 0 for duplicated points.
double separation(const PointSet& x);

double distance(std::span<const double> a, std::span<const double> b);

// One row per point, header x1..xd.
void write_points_csv(const PointSet& x, std::ostream& out);
PointSet read_points_csv(std::istream& in, const Domain& domain, std::string label = {});

}  // namespace ks

#ifndef CONLAB_IO_HPP
#define CONLAB_IO_HPP

#include <iosfwd>
#include <optional>

#include "conlab/cone.hpp"
#include "conlab/fields.hpp"

namespace conlab {

class IoError : public std::runtime_error {
public:
  IoError(std::string msg, int line = 0) : std::runtime_error(std::move(msg)), line(line) {}
  int line;
};

// Metric files are line oriented UTF-8 with '#' comments:
//   dim = N
//   coord I = NAME
//   domain I = LO HI
//   const NAME = REAL        (optional, repeatable)
//   g I J = EXPRESSION       (unset entries are 0; conflicting (I,J)/(J,I)
//                             strings are an error)
MetricChart parse_metric(const std::string& text);
MetricChart load_metric_file(const std::string& path);
std::string metric_to_text(const MetricChart& chart);

// Field files share the line syntax:
//   kind = concircular | sinyukov | covector | sinyukov-lifted
//   phi I = EXPR / rho = EXPR / K = REAL                      (concircular)
//   a I J = EXPR / lambda I = EXPR / mu = EXPR / K = REAL     (sinyukov)
//   w I = EXPR                                                (covector)
//   a I J = EXPR / K = REAL                                   (sinyukov-lifted)
struct FieldFile {
  enum class Kind { Concircular, Sinyukov, Covector, SinyukovLifted } kind;
  ConcircularCandidate concircular;
  SinyukovSolution sinyukov;
  CovectorField covector;
  BilinearField lifted; // raw (n+1)-dim components
  std::optional<double> K;
  int dim = 0;
};

FieldFile parse_field(const std::string& text);
FieldFile load_field_file(const std::string& path);

std::string field_to_text(const ConcircularCandidate& c);
std::string field_to_text(const SinyukovSolution& s, bool with_K = true);
std::string field_to_text(const CovectorField& w);
std::string field_to_text(const LiftedCovector& w);
std::string field_to_text(const LiftedBilinear& a);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& content);

} // namespace conlab

#endif

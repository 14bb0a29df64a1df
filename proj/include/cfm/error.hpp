#pragma once

#include <stdexcept>
#include <string>

namespace cfm {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A model frame whose linear part cannot be inverted.
class SingularFrame : public Error {
 public:
  using Error::Error;
};

/// The soft inlier mass fell below the usable minimum; every point is
/// being explained by the outlier component.
class DegenerateResponsibility : public Error {
 public:
  DegenerateResponsibility(const std::string& what, double inlier_mass)
      : Error(what), inlier_mass_(inlier_mass) {}
  double inlier_mass() const { return inlier_mass_; }

 private:
  double inlier_mass_;
};

class InvalidSpec : public Error {
 public:
  using Error::Error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// Malformed input file; the message carries line or record context.
class ParseError : public Error {
 public:
  using Error::Error;
};

}  // namespace cfm

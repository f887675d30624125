#pragma once

#include <filesystem>
#include <memory>
#include <string>

namespace ipikit {

struct LeafCertificate {
  std::string cert_pem;
  std::string key_pem;
};

/// Local certificate authority for selective TLS interception. CA material
/// lives as ca.pem / ca.key in a state directory; per-host leaf certificates
/// are minted on demand, signed by the CA, and cached for the process
/// lifetime. The ca.pem file is what gets installed into the trust store of
/// the agent under test.
class CertificateAuthority {
 public:
  /// Loads existing CA material or generates it on first run. Throws when
  /// the files exist but cannot be parsed.
  static CertificateAuthority open_or_create(const std::filesystem::path& state_dir);

  CertificateAuthority(CertificateAuthority&&) noexcept;
  CertificateAuthority& operator=(CertificateAuthority&&) noexcept;
  ~CertificateAuthority();

  const std::filesystem::path& certificate_path() const;
  std::string certificate_pem() const;

  /// Mints (or returns the cached) host certificate. `host` may be a DNS
  /// name or an IP literal; both land in the subjectAltName. Throws on
  /// generation failure.
  LeafCertificate leaf_for_host(const std::string& host);

 private:
  CertificateAuthority();
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace ipikit

#include "ipikit/certificate_authority.hpp"

#include <openssl/bio.h>
#include <openssl/err.h>
#include <openssl/evp.h>
#include <openssl/pem.h>
#include <openssl/rand.h>
#include <openssl/x509v3.h>

#include <arpa/inet.h>

#include <cstring>
#include <map>
#include <mutex>

#include "ipikit/util.hpp"

namespace ipikit {

namespace {

[[noreturn]] void ssl_fail(const std::string& what) {
  char buf[256] = {0};
  ERR_error_string_n(ERR_get_error(), buf, sizeof(buf));
  throw Error(what + ": " + buf);
}

struct EvpKeyDeleter {
  void operator()(EVP_PKEY* p) const { EVP_PKEY_free(p); }
};
struct X509Deleter {
  void operator()(X509* p) const { X509_free(p); }
};
struct BioDeleter {
  void operator()(BIO* p) const { BIO_free(p); }
};

using KeyPtr = std::unique_ptr<EVP_PKEY, EvpKeyDeleter>;
using CertPtr = std::unique_ptr<X509, X509Deleter>;
using BioPtr = std::unique_ptr<BIO, BioDeleter>;

KeyPtr generate_key() {
  EVP_PKEY* key = EVP_PKEY_Q_keygen(nullptr, nullptr, "EC", "P-256");
  if (key == nullptr) ssl_fail("key generation failed");
  return KeyPtr(key);
}

void set_random_serial(X509* cert) {
  unsigned char bytes[8];
  RAND_bytes(bytes, sizeof(bytes));
  bytes[0] &= 0x7F;  // keep the serial positive
  uint64_t serial = 0;
  std::memcpy(&serial, bytes, sizeof(serial));
  ASN1_INTEGER_set_uint64(X509_get_serialNumber(cert), serial);
}

void add_name_entry(X509_NAME* name, const char* field, const std::string& value) {
  X509_NAME_add_entry_by_txt(name, field, MBSTRING_ASC,
                             reinterpret_cast<const unsigned char*>(value.c_str()), -1, -1, 0);
}

void add_extension(X509* cert, X509* issuer, int nid, const char* value) {
  X509V3_CTX ctx;
  X509V3_set_ctx_nodb(&ctx);
  X509V3_set_ctx(&ctx, issuer, cert, nullptr, nullptr, 0);
  X509_EXTENSION* ext = X509V3_EXT_conf_nid(nullptr, &ctx, nid, value);
  if (ext == nullptr) ssl_fail(std::string("extension failed: ") + value);
  X509_add_ext(cert, ext, -1);
  X509_EXTENSION_free(ext);
}

bool is_ip_literal(const std::string& host) {
  in_addr v4{};
  in6_addr v6{};
  return inet_pton(AF_INET, host.c_str(), &v4) == 1 ||
         inet_pton(AF_INET6, host.c_str(), &v6) == 1;
}

std::string pem_of_cert(X509* cert) {
  BioPtr bio(BIO_new(BIO_s_mem()));
  if (!PEM_write_bio_X509(bio.get(), cert)) ssl_fail("PEM encode certificate");
  char* data = nullptr;
  long len = BIO_get_mem_data(bio.get(), &data);
  return std::string(data, static_cast<size_t>(len));
}

std::string pem_of_key(EVP_PKEY* key) {
  BioPtr bio(BIO_new(BIO_s_mem()));
  if (!PEM_write_bio_PrivateKey(bio.get(), key, nullptr, nullptr, 0, nullptr, nullptr)) {
    ssl_fail("PEM encode key");
  }
  char* data = nullptr;
  long len = BIO_get_mem_data(bio.get(), &data);
  return std::string(data, static_cast<size_t>(len));
}

}  // namespace

struct CertificateAuthority::Impl {
  std::filesystem::path cert_path;
  std::filesystem::path key_path;
  KeyPtr key;
  CertPtr cert;
  std::mutex mutex;
  std::map<std::string, LeafCertificate> cache;
};

CertificateAuthority::CertificateAuthority() : impl_(std::make_unique<Impl>()) {}
CertificateAuthority::CertificateAuthority(CertificateAuthority&&) noexcept = default;
CertificateAuthority& CertificateAuthority::operator=(CertificateAuthority&&) noexcept = default;
CertificateAuthority::~CertificateAuthority() = default;

CertificateAuthority CertificateAuthority::open_or_create(const std::filesystem::path& state_dir) {
  std::filesystem::create_directories(state_dir);
  CertificateAuthority ca;
  ca.impl_->cert_path = state_dir / "ca.pem";
  ca.impl_->key_path = state_dir / "ca.key";

  bool cert_exists = std::filesystem::exists(ca.impl_->cert_path);
  bool key_exists = std::filesystem::exists(ca.impl_->key_path);
  if (cert_exists != key_exists) {
    throw Error("CA state is incomplete: need both " + ca.impl_->cert_path.string() + " and " +
                ca.impl_->key_path.string());
  }

  if (cert_exists) {
    BioPtr cert_bio(BIO_new_file(ca.impl_->cert_path.string().c_str(), "r"));
    BioPtr key_bio(BIO_new_file(ca.impl_->key_path.string().c_str(), "r"));
    if (!cert_bio || !key_bio) throw Error("CA material unreadable in " + state_dir.string());
    ca.impl_->cert.reset(PEM_read_bio_X509(cert_bio.get(), nullptr, nullptr, nullptr));
    ca.impl_->key.reset(PEM_read_bio_PrivateKey(key_bio.get(), nullptr, nullptr, nullptr));
    if (!ca.impl_->cert || !ca.impl_->key) {
      throw Error("CA material in " + state_dir.string() + " is not valid PEM");
    }
    return ca;
  }

  ca.impl_->key = generate_key();
  CertPtr cert(X509_new());
  X509_set_version(cert.get(), 2);
  set_random_serial(cert.get());
  X509_gmtime_adj(X509_getm_notBefore(cert.get()), -86400L);
  X509_gmtime_adj(X509_getm_notAfter(cert.get()), 60L * 60 * 24 * 365 * 10);
  X509_NAME* name = X509_get_subject_name(cert.get());
  add_name_entry(name, "O", "ipikit");
  add_name_entry(name, "CN", "ipikit test CA");
  X509_set_issuer_name(cert.get(), name);
  X509_set_pubkey(cert.get(), ca.impl_->key.get());
  add_extension(cert.get(), cert.get(), NID_basic_constraints, "critical,CA:TRUE");
  add_extension(cert.get(), cert.get(), NID_key_usage, "critical,keyCertSign,cRLSign");
  add_extension(cert.get(), cert.get(), NID_subject_key_identifier, "hash");
  if (!X509_sign(cert.get(), ca.impl_->key.get(), EVP_sha256())) ssl_fail("CA self-sign failed");
  ca.impl_->cert = std::move(cert);

  write_file(ca.impl_->cert_path, pem_of_cert(ca.impl_->cert.get()));
  write_file(ca.impl_->key_path, pem_of_key(ca.impl_->key.get()));
  std::filesystem::permissions(ca.impl_->key_path, std::filesystem::perms::owner_read |
                                                       std::filesystem::perms::owner_write);
  return ca;
}

const std::filesystem::path& CertificateAuthority::certificate_path() const {
  return impl_->cert_path;
}

std::string CertificateAuthority::certificate_pem() const {
  return pem_of_cert(impl_->cert.get());
}

LeafCertificate CertificateAuthority::leaf_for_host(const std::string& host) {
  std::lock_guard<std::mutex> lock(impl_->mutex);
  auto cached = impl_->cache.find(host);
  if (cached != impl_->cache.end()) return cached->second;

  KeyPtr key = generate_key();
  CertPtr cert(X509_new());
  X509_set_version(cert.get(), 2);
  set_random_serial(cert.get());
  X509_gmtime_adj(X509_getm_notBefore(cert.get()), -86400L);
  X509_gmtime_adj(X509_getm_notAfter(cert.get()), 60L * 60 * 24 * 398);
  X509_NAME* subject = X509_get_subject_name(cert.get());
  add_name_entry(subject, "CN", host);
  X509_set_issuer_name(cert.get(), X509_get_subject_name(impl_->cert.get()));
  X509_set_pubkey(cert.get(), key.get());
  add_extension(cert.get(), impl_->cert.get(), NID_basic_constraints, "CA:FALSE");
  add_extension(cert.get(), impl_->cert.get(), NID_key_usage,
                "critical,digitalSignature,keyEncipherment");
  add_extension(cert.get(), impl_->cert.get(), NID_ext_key_usage, "serverAuth");
  std::string san = is_ip_literal(host) ? "IP:" + host + ",DNS:" + host : "DNS:" + host;
  add_extension(cert.get(), impl_->cert.get(), NID_subject_alt_name, san.c_str());
  if (!X509_sign(cert.get(), impl_->key.get(), EVP_sha256())) {
    ssl_fail("leaf signing failed for " + host);
  }

  LeafCertificate leaf{pem_of_cert(cert.get()), pem_of_key(key.get())};
  impl_->cache.emplace(host, leaf);
  return leaf;
}

}  // namespace ipikit

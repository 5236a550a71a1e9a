#pragma once

#include <stdexcept>
#include <string>

namespace gkm {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Authentication failure, or the decrypting party does not hold the key.
class WrongKey : public Error {
public:
    using Error::Error;
};

class DuplicateMember : public Error {
public:
    using Error::Error;
};

class UnknownMember : public Error {
public:
    using Error::Error;
};

/// Members and server disagree on the group key after a rekey batch.
class ConsistencyViolation : public Error {
public:
    using Error::Error;
};

class InvalidScript : public Error {
public:
    using Error::Error;
};

} // namespace gkm

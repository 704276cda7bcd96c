// generated kernel: dot_product
// BFV parameters: poly_modulus_degree >= 32, plain_modulus = 65537, slots = 16
#include "seal/seal.h"

void dot_product(seal::Evaluator &evaluator, const seal::GaloisKeys &gal_keys,
        const seal::RelinKeys &relin_keys,
        const seal::Ciphertext &a,
        const seal::Ciphertext &b,
        seal::Ciphertext &result)
{
    seal::Ciphertext ct0;
    evaluator.multiply(a, b, ct0);
    seal::Ciphertext ct1;
    evaluator.relinearize(ct0, relin_keys, ct1);
    seal::Ciphertext ct2;
    evaluator.rotate_rows(ct1, 4, gal_keys, ct2);
    seal::Ciphertext ct3;
    evaluator.add(ct1, ct2, ct3);
    seal::Ciphertext ct4;
    evaluator.rotate_rows(ct3, 2, gal_keys, ct4);
    seal::Ciphertext ct5;
    evaluator.add(ct3, ct4, ct5);
    seal::Ciphertext ct6;
    evaluator.rotate_rows(ct5, 1, gal_keys, ct6);
    seal::Ciphertext ct7;
    evaluator.add(ct5, ct6, ct7);
    result = ct7;
}

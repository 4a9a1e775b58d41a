public interface A<T> {
    T func();
}
